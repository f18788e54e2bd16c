//! Shared test helpers: fixture paths and a seeded synthetic corpus with
//! hand-specified dependency parses.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

pub const VANGUARD: &str = "3f2b8c1e-7d4a-4e6b-9c3f-1a2b3c4d5e01";
pub const APPOINTMENT: &str = "8a41d0f7-2c9e-4b13-a6d5-77e0c1b2f302";
pub const ATTACK: &str = "c95e3a28-1f6b-4d70-8e2a-5b9d4f6c0a03";
pub const CROSS_SENTENCE: &str = "d4c7b9e1-6a0f-4f2d-b318-2e5a7c9d1b04";
pub const POLICE: &str = "e1f08a6c-93b2-4c5e-a7d1-0c6b8e2f4a05";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Person,
    Organization,
    Rank,
    Title,
}

impl Kind {
    fn brat(self) -> &'static str {
        match self {
            Kind::Person => "Person",
            Kind::Organization => "Organization",
            Kind::Rank => "Rank",
            Kind::Title => "Title_Role",
        }
    }
}

struct Tok {
    form: String,
    head: usize,
    rel: &'static str,
}

#[derive(Default)]
struct Sent {
    toks: Vec<Tok>,
    // (kind, first token, last token), 1-based inclusive
    ents: Vec<(Kind, usize, usize)>,
    // (relation, person entity, other entity), as indices into `ents`
    rels: Vec<(&'static str, usize, usize)>,
}

impl Sent {
    fn add(&mut self, form: &str, head: usize, rel: &'static str) -> usize {
        self.toks.push(Tok {
            form: form.to_string(),
            head,
            rel,
        });
        self.toks.len()
    }

    fn set(&mut self, idx: usize, head: usize, rel: &'static str) {
        self.toks[idx - 1].head = head;
        self.toks[idx - 1].rel = rel;
    }

    fn ent(&mut self, kind: Kind, first: usize, last: usize) -> usize {
        self.ents.push((kind, first, last));
        self.ents.len() - 1
    }

    /// Words attached as compounds to their last word. Returns (first, head).
    fn compound(&mut self, words: &str) -> (usize, usize) {
        let ws: Vec<&str> = words.split(' ').collect();
        let first = self.toks.len() + 1;
        let head = first + ws.len() - 1;
        for (i, w) in ws.iter().enumerate() {
            if i + 1 == ws.len() {
                self.add(w, 0, "dep");
            } else {
                self.add(w, head, "compound");
            }
        }
        (first, head)
    }

    /// A title such as "Chief of Army Staff": the part before "of" heads the
    /// phrase. Returns (first, last, head).
    fn title(&mut self, words: &str) -> (usize, usize, usize) {
        match words.split_once(" of ") {
            None => {
                let (first, head) = self.compound(words);
                (first, head, head)
            }
            Some((left, right)) => {
                let (first, lhead) = self.compound(left);
                let of = self.add("of", 0, "case");
                let (_, rhead) = self.compound(right);
                self.set(of, rhead, "case");
                self.set(rhead, lhead, "nmod");
                (first, rhead, lhead)
            }
        }
    }

    /// Rank words as compounds of the following person's first name, then
    /// the name (first name heads, surname is flat). Returns (rank, person,
    /// person head).
    fn ranked_person(&mut self, rank: &str, first: &str, last: &str) -> (usize, usize, usize) {
        let rws: Vec<&str> = rank.split(' ').collect();
        let rstart = self.toks.len() + 1;
        let phead = rstart + rws.len();
        for w in &rws {
            self.add(w, phead, "compound");
        }
        self.add(first, 0, "dep");
        self.add(last, phead, "flat");
        let r = self.ent(Kind::Rank, rstart, phead - 1);
        let p = self.ent(Kind::Person, phead, phead + 1);
        (r, p, phead)
    }

    fn ranked_person_from(&mut self, rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
        let rank = *RANKS.choose(rng).unwrap();
        let first = *FIRST.choose(rng).unwrap();
        let last = *LAST.choose(rng).unwrap();
        self.ranked_person(rank, first, last)
    }
}

const FIRST: &[&str] = &[
    "Jack", "Emmanuel", "Sagir", "Tukur", "Lamidi", "Fatai", "Ahmed", "Musa", "Ibrahim", "Bello",
    "Chukwu", "Adamu", "Yusuf", "Olu", "Garba", "Kenneth", "Abdul", "Victor", "Samuel", "Danjuma",
];
const LAST: &[&str] = &[
    "Nwaogbo",
    "Atewe",
    "Buratai",
    "Adeosun",
    "Owoseni",
    "Ali",
    "Minimah",
    "Irabor",
    "Olonisakin",
    "Attahiru",
    "Yahaya",
    "Okonkwo",
    "Mohammed",
    "Usman",
    "Ogunlade",
    "Ezeh",
    "Abubakar",
    "Danladi",
];
const RANKS: &[&str] = &[
    "Major General",
    "Brigadier General",
    "Lieutenant Colonel",
    "Colonel",
    "Major",
    "Captain",
    "Lieutenant General",
    "Inspector",
    "Superintendent",
];
const TITLES: &[&str] = &[
    "Commander",
    "General Officer Commanding",
    "Chief of Logistics",
    "Chief of Training",
    "Director of Army Public Relations",
    "Theatre Commander",
    "Chief of Staff",
    "Spokesman",
    "Commissioner of Police",
];
const ORGS: &[&str] = &[
    "7 Division",
    "3 Armoured Division",
    "Nigerian Army",
    "Nigerian Navy",
    "Rapid Response Squad",
    "Joint Task Force",
    "Operation Lafiya Dole",
    "82 Division",
    "Army Headquarters",
    "Police Command",
];
const PLACES: &[&str] = &[
    "Jos",
    "Maiduguri",
    "Abuja",
    "Lagos",
    "Kaduna",
    "Yola",
    "Bama",
    "Damaturu",
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).unwrap()
}

/// "[Title] of [Org], [Rank] [Person], said troops were ready."
fn appositive(rng: &mut ChaCha8Rng) -> Sent {
    let mut s = Sent::default();
    let (tf, tl, th) = s.title(pick(rng, TITLES));
    let t = s.ent(Kind::Title, tf, tl);
    let of = s.add("of", 0, "case");
    let (of_first, oh) = s.compound(pick(rng, ORGS));
    s.set(of, oh, "case");
    s.set(oh, th, "nmod");
    let o = s.ent(Kind::Organization, of_first, oh);
    let c1 = s.add(",", 0, "punct");
    let (r, p, ph) = s.ranked_person_from(rng);
    s.set(c1, ph, "punct");
    s.set(ph, th, "appos");
    s.add(",", ph, "punct");
    let said = s.add("said", 0, "root");
    s.set(th, said, "nsubj");
    let troops = s.add("troops", 0, "nsubj");
    let were = s.add("were", 0, "cop");
    let ready = s.add("ready", said, "ccomp");
    s.set(troops, ready, "nsubj");
    s.set(were, ready, "cop");
    s.add(".", said, "punct");
    s.rels = vec![
        ("has_title_role", p, t),
        ("is_posted", p, o),
        ("has_rank", p, r),
    ];
    s
}

/// "[Rank] [Person] commands the [Org] in [Place]."
fn commands(rng: &mut ChaCha8Rng) -> Sent {
    let mut s = Sent::default();
    let (r, p, ph) = s.ranked_person_from(rng);
    let verb = s.add(pick(rng, &["commands", "leads", "heads"]), 0, "root");
    s.set(ph, verb, "nsubj");
    let det = s.add("the", 0, "det");
    let (of_first, oh) = s.compound(pick(rng, ORGS));
    s.set(det, oh, "det");
    s.set(oh, verb, "obj");
    let o = s.ent(Kind::Organization, of_first, oh);
    let case = s.add("in", 0, "case");
    let place = s.add(pick(rng, PLACES), oh, "nmod");
    s.set(case, place, "case");
    s.add(".", verb, "punct");
    s.rels = vec![("has_rank", p, r), ("is_posted", p, o)];
    s
}

/// "The [Title0] has appointed [Rank] [P1] as the new [Title1] and [Rank]
/// [P2] as [Title2] of [Org]." The second person hangs off the first title
/// as a conjunct.
fn appointment(rng: &mut ChaCha8Rng) -> Sent {
    let mut s = Sent::default();
    let the = s.add("The", 0, "det");
    let (t0f, t0l, t0h) = s.title(pick(
        rng,
        &[
            "Chief of Army Staff",
            "Chief of Naval Staff",
            "Minister of Defence",
        ],
    ));
    s.set(the, t0h, "det");
    s.ent(Kind::Title, t0f, t0l);
    let has = s.add("has", 0, "aux");
    let verb = s.add("appointed", 0, "root");
    s.set(t0h, verb, "nsubj");
    s.set(has, verb, "aux");
    let (r1, p1, p1h) = s.ranked_person_from(rng);
    s.set(p1h, verb, "obj");
    let as1 = s.add("as", 0, "case");
    let det = s.add("the", 0, "det");
    let new = s.add("new", 0, "amod");
    let (t1f, t1l, t1h) = s.title(pick(rng, TITLES));
    let t1 = s.ent(Kind::Title, t1f, t1l);
    s.set(as1, t1h, "case");
    s.set(det, t1h, "det");
    s.set(new, t1h, "amod");
    s.set(t1h, verb, "obl");
    let and = s.add("and", 0, "cc");
    let (r2, p2, p2h) = s.ranked_person_from(rng);
    s.set(and, p2h, "cc");
    s.set(p2h, t1h, "conj");
    let as2 = s.add("as", 0, "case");
    let (t2f, t2l, t2h) = s.title(pick(
        rng,
        &[
            "Commander",
            "General Officer Commanding",
            "Theatre Commander",
        ],
    ));
    let t2 = s.ent(Kind::Title, t2f, t2l);
    s.set(as2, t2h, "case");
    s.set(t2h, p2h, "nmod");
    let of = s.add("of", 0, "case");
    let (of_first, oh) = s.compound(pick(rng, ORGS));
    s.set(of, oh, "case");
    s.set(oh, t2h, "nmod");
    let o = s.ent(Kind::Organization, of_first, oh);
    s.add(".", verb, "punct");
    s.rels = vec![
        ("has_rank", p1, r1),
        ("has_title_role", p1, t1),
        ("has_rank", p2, r2),
        ("has_title_role", p2, t2),
        ("is_posted", p2, o),
    ];
    s
}

/// "[Rank] [Person] said gunmen had attacked a [Org] base in [Place]." The
/// organization is not related to the speaker.
fn attack(rng: &mut ChaCha8Rng) -> Sent {
    let mut s = Sent::default();
    let (r, p, ph) = s.ranked_person_from(rng);
    let said = s.add("said", 0, "root");
    s.set(ph, said, "nsubj");
    let gunmen = s.add(pick(rng, &["gunmen", "insurgents", "bandits"]), 0, "nsubj");
    let had = s.add("had", 0, "aux");
    let verb = s.add("attacked", said, "ccomp");
    s.set(gunmen, verb, "nsubj");
    s.set(had, verb, "aux");
    let a = s.add("a", 0, "det");
    let (of_first, oh) = s.compound(pick(
        rng,
        &[
            "Nigerian Air Force",
            "Nigerian Army",
            "Nigerian Navy",
            "Police",
        ],
    ));
    let o = s.ent(Kind::Organization, of_first, oh);
    let base = s.add("base", verb, "obj");
    s.set(oh, base, "compound");
    s.set(a, base, "det");
    let case = s.add("in", 0, "case");
    let place = s.add(pick(rng, PLACES), base, "nmod");
    s.set(case, place, "case");
    s.add(".", said, "punct");
    let _ = o;
    s.rels = vec![("has_rank", p, r)];
    s
}

/// "[Title] [First] [Last] said [Rank] [Person] of the [Org] was arrested."
fn arrest(rng: &mut ChaCha8Rng) -> Sent {
    let mut s = Sent::default();
    let (tf, tl, th) = s.title(pick(
        rng,
        &["Commissioner of Police", "Spokesman", "Chief of Staff"],
    ));
    let t = s.ent(Kind::Title, tf, tl);
    let fh = s.add(pick(rng, FIRST), 0, "nsubj");
    s.add(pick(rng, LAST), fh, "flat");
    let p1 = s.ent(Kind::Person, fh, fh + 1);
    s.set(th, fh, "compound");
    let said = s.add("said", 0, "root");
    s.set(fh, said, "nsubj");
    let (r, p2, p2h) = s.ranked_person_from(rng);
    let of = s.add("of", 0, "case");
    let the = s.add("the", 0, "det");
    let (of_first, oh) = s.compound(pick(rng, ORGS));
    s.set(of, oh, "case");
    s.set(the, oh, "det");
    s.set(oh, p2h, "nmod");
    let o = s.ent(Kind::Organization, of_first, oh);
    let was = s.add("was", 0, "aux:pass");
    let verb = s.add("arrested", said, "ccomp");
    s.set(was, verb, "aux:pass");
    s.set(p2h, verb, "nsubj:pass");
    s.add(".", said, "punct");
    s.rels = vec![
        ("has_title_role", p1, t),
        ("has_rank", p2, r),
        ("is_posted", p2, o),
    ];
    s
}

/// "[Rank] [P1], the [Title] of [Org], met [Rank] [P2] in [Place]."
fn meeting(rng: &mut ChaCha8Rng) -> Sent {
    let mut s = Sent::default();
    let (r1, p1, p1h) = s.ranked_person_from(rng);
    let c1 = s.add(",", p1h, "punct");
    let _ = c1;
    let the = s.add("the", 0, "det");
    let (tf, tl, th) = s.title(pick(rng, TITLES));
    let t = s.ent(Kind::Title, tf, tl);
    s.set(the, th, "det");
    s.set(th, p1h, "appos");
    let of = s.add("of", 0, "case");
    let (of_first, oh) = s.compound(pick(rng, ORGS));
    s.set(of, oh, "case");
    s.set(oh, th, "nmod");
    let o = s.ent(Kind::Organization, of_first, oh);
    s.add(",", p1h, "punct");
    let verb = s.add("met", 0, "root");
    s.set(p1h, verb, "nsubj");
    let (r2, p2, p2h) = s.ranked_person_from(rng);
    s.set(p2h, verb, "obj");
    let case = s.add("in", 0, "case");
    let place = s.add(pick(rng, PLACES), verb, "obl");
    s.set(case, place, "case");
    s.add(".", verb, "punct");
    s.rels = vec![
        ("has_rank", p1, r1),
        ("has_title_role", p1, t),
        ("is_posted", p1, o),
        ("has_rank", p2, r2),
    ];
    s
}

/// Two sentences; the title in the second belongs to the person of the first.
fn visit_pair(rng: &mut ChaCha8Rng) -> (Sent, Sent, (usize, usize)) {
    let mut a = Sent::default();
    let (r, p, ph) = a.ranked_person_from(rng);
    let verb = a.add("visited", 0, "root");
    a.set(ph, verb, "nsubj");
    a.add("troops", verb, "obj");
    let case = a.add("in", 0, "case");
    let place = a.add(pick(rng, PLACES), verb, "obl");
    a.set(case, place, "case");
    a.add(".", verb, "punct");
    a.rels = vec![("has_rank", p, r)];

    let mut b = Sent::default();
    let the = b.add("The", 0, "det");
    let (tf, tl, th) = b.title(pick(rng, &["Chief of Army Staff", "Chief of Naval Staff"]));
    let t = b.ent(Kind::Title, tf, tl);
    b.set(the, th, "det");
    let was = b.add("was", 0, "aux:pass");
    let verb = b.add("received", 0, "root");
    b.set(was, verb, "aux:pass");
    b.set(th, verb, "nsubj:pass");
    let by = b.add("by", 0, "case");
    let (r2, p2, p2h) = b.ranked_person_from(rng);
    b.set(by, p2h, "case");
    b.set(p2h, verb, "obl");
    b.add(".", verb, "punct");
    b.rels = vec![("has_rank", p2, r2)];
    (a, b, (p, t))
}

/// A rendered document.
pub struct SynthDoc {
    pub stem: String,
    pub text: String,
    pub ann: String,
    pub conllu: String,
}

/// (sentence, entity index) of each side of a cross-sentence relation.
type CrossLink = ((usize, usize), (usize, usize));

fn render(stem: String, sents: &[Sent], cross: &[CrossLink]) -> SynthDoc {
    let mut text = String::new();
    let mut conllu = String::new();
    let mut spans: Vec<Vec<(usize, usize)>> = Vec::new();
    for (si, s) in sents.iter().enumerate() {
        if si > 0 {
            text.push(' ');
            conllu.push('\n');
        }
        let mut offs = Vec::new();
        for (k, t) in s.toks.iter().enumerate() {
            if k > 0 && ![",", "."].contains(&t.form.as_str()) {
                text.push(' ');
            }
            let start = text.chars().count();
            text.push_str(&t.form);
            offs.push((start, text.chars().count()));
            conllu.push_str(&format!(
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_\n",
                k + 1,
                t.form,
                t.head,
                t.rel
            ));
        }
        spans.push(offs);
    }
    text.push('\n');
    let chars: Vec<char> = text.chars().collect();
    let mut ann = String::new();
    let mut ids: Vec<Vec<String>> = Vec::new();
    let mut n = 0;
    for (si, s) in sents.iter().enumerate() {
        let mut sent_ids = Vec::new();
        for &(kind, a, b) in &s.ents {
            n += 1;
            let (start, end) = (spans[si][a - 1].0, spans[si][b - 1].1);
            let surface: String = chars[start..end].iter().collect();
            ann.push_str(&format!("T{n}\t{} {start} {end}\t{surface}\n", kind.brat()));
            sent_ids.push(format!("T{n}"));
        }
        ids.push(sent_ids);
    }
    let mut r = 0;
    for (si, s) in sents.iter().enumerate() {
        for &(rel, p, o) in &s.rels {
            r += 1;
            ann.push_str(&format!(
                "R{r}\t{rel} Arg1:{} Arg2:{}\n",
                ids[si][p], ids[si][o]
            ));
        }
    }
    for &((ps, pe), (ts, te)) in cross {
        r += 1;
        ann.push_str(&format!(
            "R{r}\thas_title_role Arg1:{} Arg2:{}\n",
            ids[ps][pe], ids[ts][te]
        ));
    }
    SynthDoc {
        stem,
        text,
        ann,
        conllu,
    }
}

fn stem(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{:08x}-{:04x}-4{:03x}-{:04x}-{:012x}",
        rng.gen::<u32>(),
        rng.gen::<u16>(),
        rng.gen::<u16>() & 0xfff,
        rng.gen::<u16>(),
        rng.gen::<u64>() & 0xffff_ffff_ffff
    )
}

/// `n` documents of one to three sentences from `seed`.
pub fn synthetic_docs(n: usize, seed: u64) -> Vec<SynthDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let makers: [fn(&mut ChaCha8Rng) -> Sent; 6] =
        [appositive, commands, appointment, attack, arrest, meeting];
    (0..n)
        .map(|_| {
            let id = stem(&mut rng);
            let mut sents = Vec::new();
            let mut cross = Vec::new();
            let count = rng.gen_range(1..=3);
            for _ in 0..count {
                if rng.gen_bool(0.1) {
                    let (a, b, (p, t)) = visit_pair(&mut rng);
                    let base = sents.len();
                    sents.push(a);
                    sents.push(b);
                    cross.push(((base, p), (base + 1, t)));
                } else {
                    let f = makers[rng.gen_range(0..makers.len())];
                    sents.push(f(&mut rng));
                }
            }
            render(id, &sents, &cross)
        })
        .collect()
}

/// Write a synthetic corpus into `dir`.
pub fn write_synthetic(dir: &Path, n: usize, seed: u64) {
    fs::create_dir_all(dir).unwrap();
    for d in synthetic_docs(n, seed) {
        fs::write(dir.join(format!("{}.txt", d.stem)), &d.text).unwrap();
        fs::write(dir.join(format!("{}.ann", d.stem)), &d.ann).unwrap();
        fs::write(dir.join(format!("{}.conllu", d.stem)), &d.conllu).unwrap();
    }
}

/// The public corpus when `FORCEGRAPH_CORPUS` points at it, otherwise a
/// freshly written 130-document synthetic one. The flag says which.
pub fn evaluation_corpus(scratch: &Path) -> (PathBuf, bool) {
    match std::env::var_os("FORCEGRAPH_CORPUS") {
        Some(p) if Path::new(&p).is_dir() => (PathBuf::from(p), true),
        _ => {
            let dir = scratch.join("synthetic");
            write_synthetic(&dir, 130, 2020);
            (dir, false)
        }
    }
}
