//! Regenerates `assets/kinship_rules.txt`.
//!
//! Rather than hand-writing several hundred composition rules, this tool
//! reads them off a closed family universe: a five-generation tree with
//! consistent monogamous marriages, multiple siblings per couple, and
//! married-in branches. For every ordered person triple (a, w, b) whose
//! pairwise relations are expressible in the 24-label vocabulary, the
//! surface relation of (a, b) is added to the `COMPOSE` entry for the pair
//! of link labels; inverses are read off ordered pairs the same way.
//! Self-referring cases (a's mother's son being a himself) drop out
//! naturally because labels only describe *other* people.
//!
//! Usage: `cargo run --bin kinship_tablegen > crates/relgraph/assets/kinship_rules.txt`

use std::collections::{BTreeMap, BTreeSet};

use relgraph::graph::Gender;

#[derive(Debug)]
struct Person {
    name: &'static str,
    gender: Gender,
    parents: Option<(usize, usize)>,
    spouse: Option<usize>,
}

#[derive(Default)]
struct Universe {
    people: Vec<Person>,
}

impl Universe {
    fn founder(&mut self, name: &'static str, gender: Gender) -> usize {
        self.people.push(Person {
            name,
            gender,
            parents: None,
            spouse: None,
        });
        self.people.len() - 1
    }

    fn marry(&mut self, a: usize, b: usize) {
        assert!(self.people[a].spouse.is_none() && self.people[b].spouse.is_none());
        assert_ne!(self.people[a].gender, self.people[b].gender);
        self.people[a].spouse = Some(b);
        self.people[b].spouse = Some(a);
    }

    fn child(&mut self, name: &'static str, gender: Gender, father: usize, mother: usize) -> usize {
        assert_eq!(self.people[father].gender, Gender::Male);
        assert_eq!(self.people[mother].gender, Gender::Female);
        self.people.push(Person {
            name,
            gender,
            parents: Some((father, mother)),
            spouse: None,
        });
        self.people.len() - 1
    }

    fn parents(&self, i: usize) -> Vec<usize> {
        self.people[i]
            .parents
            .map(|(f, m)| vec![f, m])
            .unwrap_or_default()
    }

    fn ancestors_at(&self, i: usize, depth: usize) -> Vec<usize> {
        let mut level = vec![i];
        for _ in 0..depth {
            level = level.iter().flat_map(|&p| self.parents(p)).collect();
        }
        level
    }

    fn siblings(&self, i: usize) -> Vec<usize> {
        let mine = self.parents(i);
        if mine.is_empty() {
            return Vec::new();
        }
        (0..self.people.len())
            .filter(|&j| j != i && self.parents(j).iter().any(|p| mine.contains(p)))
            .collect()
    }

    fn children(&self, i: usize) -> Vec<usize> {
        (0..self.people.len())
            .filter(|&j| self.parents(j).contains(&i))
            .collect()
    }

    /// The vocabulary label for "a's ⟨label⟩ is b", if any. Checks are
    /// mutually exclusive in a consistent universe; this asserts that.
    fn surface(&self, a: usize, b: usize) -> Option<&'static str> {
        assert_ne!(a, b);
        let gb = self.people[b].gender;
        let by_gender = |m: &'static str, f: &'static str| if gb == Gender::Male { m } else { f };
        let mut hits: Vec<&'static str> = Vec::new();

        if self.people[a].spouse == Some(b) {
            hits.push(by_gender("husband", "wife"));
        }
        if self.parents(a).contains(&b) {
            hits.push(by_gender("father", "mother"));
        }
        if self.parents(b).contains(&a) {
            hits.push(by_gender("son", "daughter"));
        }
        if self.ancestors_at(a, 2).contains(&b) {
            hits.push(by_gender("grandfather", "grandmother"));
        }
        if self.ancestors_at(b, 2).contains(&a) {
            hits.push(by_gender("grandson", "granddaughter"));
        }
        if self.ancestors_at(a, 3).contains(&b) {
            hits.push(by_gender("greatgrandfather", "greatgrandmother"));
        }
        if self.ancestors_at(b, 3).contains(&a) {
            hits.push(by_gender("greatgrandson", "greatgranddaughter"));
        }
        if self.siblings(a).contains(&b) {
            hits.push(by_gender("brother", "sister"));
        }
        if self
            .parents(a)
            .iter()
            .any(|&p| self.siblings(p).contains(&b))
        {
            hits.push(by_gender("uncle", "aunt"));
        }
        if self
            .parents(b)
            .iter()
            .any(|&p| self.siblings(p).contains(&a))
        {
            hits.push(by_gender("nephew", "niece"));
        }
        if let Some(s) = self.people[a].spouse {
            if self.parents(s).contains(&b) {
                hits.push(by_gender("father-in-law", "mother-in-law"));
            }
        }
        if self
            .children(a)
            .iter()
            .any(|&c| self.people[c].spouse == Some(b))
        {
            hits.push(by_gender("son-in-law", "daughter-in-law"));
        }

        assert!(
            hits.len() <= 1,
            "ambiguous surface relation {} -> {}: {hits:?}",
            self.people[a].name,
            self.people[b].name
        );
        hits.pop()
    }
}

/// Five-generation universe with sibling-rich middle generations, both
/// maternal and paternal grandparent lines, and married-in families.
fn build_universe() -> Universe {
    let mut u = Universe::default();
    let g = Gender::Male;
    let f = Gender::Female;

    // Generation 4 (eldest) and the founding couples that marry in below.
    let adam = u.founder("Adam", g);
    let ada = u.founder("Ada", f);
    u.marry(adam, ada);
    let bella = u.founder("Bella", f);
    let bart = u.founder("Bart", g);
    let carl = u.founder("Carl", g);
    let cora = u.founder("Cora", f);
    u.marry(carl, cora);

    // Generation 3.
    let bob = u.child("Bob", g, adam, ada);
    let bea = u.child("Bea", f, adam, ada);
    let _ben = u.child("Ben", g, adam, ada);
    u.marry(bob, bella);
    u.marry(bart, bea);

    // Generation 2: four siblings on each married line.
    let cal = u.child("Cal", g, bob, bella);
    let cam = u.child("Cam", f, bob, bella);
    let cid = u.child("Cid", g, bob, bella);
    let _cleo = u.child("Cleo", f, bob, bella);
    let dot = u.child("Dot", f, bart, bea);
    let _don = u.child("Don", g, bart, bea);
    let dana = u.child("Dana", f, carl, cora);
    let _dave = u.child("Dave", g, carl, cora);
    let _dina = u.child("Dina", f, carl, cora);
    let _drew = u.child("Drew", g, carl, cora);
    u.marry(cal, dana);
    let evan = u.founder("Evan", g);
    u.marry(evan, cam);
    let finn = u.founder("Finn", g);
    u.marry(finn, dot);
    let gale = u.founder("Gale", f);
    u.marry(cid, gale);

    // Generation 1.
    let eve = u.child("Eve", f, cal, dana);
    let ed = u.child("Ed", g, cal, dana);
    let _eli = u.child("Eli", g, cal, dana);
    let _em = u.child("Em", f, cal, dana);
    let _fay = u.child("Fay", f, evan, cam);
    let _fred = u.child("Fred", g, evan, cam);
    let _gil = u.child("Gil", g, finn, dot);
    let _gwen = u.child("Gwen", f, finn, dot);
    let _kip = u.child("Kip", g, cid, gale);
    let _kay = u.child("Kay", f, cid, gale);
    let hank = u.founder("Hank", g);
    u.marry(hank, eve);
    let hal = u.founder("Hal", g);
    let hild = u.founder("Hild", f);
    u.marry(hal, hild);
    let hope = u.child("Hope", f, hal, hild);
    let _huck = u.child("Huck", g, hal, hild);
    u.marry(ed, hope);

    // Generation 0.
    let _ivy = u.child("Ivy", f, hank, eve);
    let _ian = u.child("Ian", g, hank, eve);
    let _jon = u.child("Jon", g, ed, hope);
    let _joy = u.child("Joy", f, ed, hope);

    u
}

fn main() {
    let u = build_universe();
    let n = u.people.len();

    let mut compose: BTreeMap<(String, String, String), BTreeSet<&'static str>> = BTreeMap::new();
    let mut inverse: BTreeMap<(String, String), BTreeSet<&'static str>> = BTreeMap::new();

    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let Some(r) = u.surface(a, b) else { continue };
            let ga = u.people[a].gender.as_str().to_string();
            inverse
                .entry((r.to_string(), ga))
                .or_default()
                .extend(u.surface(b, a));
            for w in 0..n {
                if w == a || w == b {
                    continue;
                }
                // Here r links a→w; r2 links w→b; the composed relation is
                // whatever a→b reads as on the ground.
                let Some(r1) = u.surface(a, w) else { continue };
                let Some(r2) = u.surface(w, b) else { continue };
                let Some(result) = u.surface(a, b) else {
                    continue;
                };
                let _ = r;
                compose
                    .entry((
                        r1.to_string(),
                        r2.to_string(),
                        u.people[b].gender.as_str().to_string(),
                    ))
                    .or_default()
                    .insert(result);
            }
        }
    }

    println!("# English kinship rule table (machine-derived from closed family universes).");
    println!("# Regenerate with: cargo run --bin kinship_tablegen > crates/relgraph/assets/kinship_rules.txt");
    println!("#");
    println!("# COMPOSE r1 r2 gender -> results   (gender of the final person)");
    println!("# INVERSE r gender -> result        (gender of the original subject)");
    println!();
    for ((r1, r2, gender), results) in &compose {
        let list: Vec<&str> = results.iter().copied().collect();
        println!("COMPOSE {r1} {r2} {gender} -> {}", list.join(","));
    }
    println!();
    for ((r, gender), results) in &inverse {
        assert_eq!(
            results.len(),
            1,
            "inverse of {r} with {gender} subject is not unique: {results:?}"
        );
        println!(
            "INVERSE {r} {gender} -> {}",
            results.iter().next().expect("nonempty")
        );
    }
}
