//! Free-group words, cone types, geodesic automata and boundary rays.

use std::collections::BTreeSet;
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A letter of the symmetric alphabet. Value `2i-1` is generator `i` and
/// `2i` is its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u16);

impl Letter {
    pub fn generator(i: u16) -> Self {
        Letter(2 * i - 1)
    }

    pub fn generator_inverse(i: u16) -> Self {
        Letter(2 * i)
    }

    pub fn inverse(self) -> Self {
        if self.0 % 2 == 1 {
            Letter(self.0 + 1)
        } else {
            Letter(self.0 - 1)
        }
    }

    /// 0-based position in the alphabet.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    /// 1-based generator number.
    pub fn generator_number(self) -> u16 {
        self.0.div_ceil(2)
    }

    pub fn is_inverse(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.generator_number();
        if g <= 26 {
            let base = if self.is_inverse() { b'A' } else { b'a' };
            write!(f, "{}", (base + (g - 1) as u8) as char)
        } else {
            write!(f, "<{}>", self.0)
        }
    }
}

/// The symmetric generating set of a group with `n` generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorAlphabet {
    n: u16,
}

impl GeneratorAlphabet {
    pub fn new(n: u16) -> Self {
        assert!(n >= 1, "alphabet needs at least one generator");
        Self { n }
    }

    pub fn rank(&self) -> u16 {
        self.n
    }

    pub fn size(&self) -> usize {
        2 * self.n as usize
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (1..=2 * self.n).map(Letter)
    }

    pub fn contains(&self, l: Letter) -> bool {
        l.0 >= 1 && l.0 <= 2 * self.n
    }

    pub fn letter(&self, value: u32) -> Result<Letter> {
        if value >= 1 && value <= 2 * self.n as u32 {
            Ok(Letter(value as u16))
        } else {
            Err(Error::UnknownLetter(value))
        }
    }
}

/// A word over the symmetric alphabet, kept reduced when built through
/// [`reduce`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Wraps letters without reducing them.
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Free-group product, reduced.
    pub fn mul(&self, other: &GroupWord) -> Self {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self { letters: out }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[1] != w[0].inverse())
    }

    /// Parses `a`, `b`, ... for generators and `A`, `B`, ... for inverses;
    /// `e` or the empty string is the identity.
    pub fn parse(text: &str, alphabet: &GeneratorAlphabet) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() || t == "e" || t == "1" {
            return Ok(Self::empty());
        }
        let mut raw = Vec::with_capacity(t.len());
        for c in t.chars() {
            let v = match c {
                'a'..='z' => 2 * (c as u32 - 'a' as u32 + 1) - 1,
                'A'..='Z' => 2 * (c as u32 - 'A' as u32 + 1),
                _ => return Err(Error::UnknownLetter(c as u32)),
            };
            raw.push(v);
        }
        reduce(&raw, alphabet)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Free reduction of a raw letter sequence.
pub fn reduce(raw: &[u32], alphabet: &GeneratorAlphabet) -> Result<GroupWord> {
    let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
    for &v in raw {
        let l = alphabet.letter(v)?;
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Ok(GroupWord { letters: out })
}

pub type StateId = usize;

/// Deterministic automaton on cone types whose paths from the initial state
/// spell geodesic words.
#[derive(Clone, Debug)]
pub struct GeodesicAutomaton {
    alphabet: GeneratorAlphabet,
    labels: Vec<u32>,
    initial: StateId,
    transitions: Vec<Vec<Option<StateId>>>,
    free: bool,
}

impl GeodesicAutomaton {
    /// The automaton of the free group: the identity state plus one state
    /// per last letter.
    pub fn free(alphabet: GeneratorAlphabet) -> Self {
        let m = alphabet.size();
        let mut transitions = vec![vec![None; m]; m + 1];
        for l in alphabet.letters() {
            transitions[0][l.index()] = Some(l.0 as usize);
            for k in alphabet.letters() {
                if k != l.inverse() {
                    transitions[l.0 as usize][k.index()] = Some(k.0 as usize);
                }
            }
        }
        Self {
            alphabet,
            labels: (0..=m as u32).collect(),
            initial: 0,
            transitions,
            free: true,
        }
    }

    /// Builds and validates an automaton from labelled states and edges.
    pub fn from_parts(
        alphabet: GeneratorAlphabet,
        states: &[u32],
        initial: u32,
        edges: &[(u32, u32, u32)],
    ) -> Result<Self> {
        let mut labels: Vec<u32> = Vec::with_capacity(states.len());
        for &s in states {
            if labels.contains(&s) {
                return Err(Error::Validation(format!("state {s} declared twice")));
            }
            labels.push(s);
        }
        let find = |s: u32| labels.iter().position(|&x| x == s);
        let initial_id = find(initial)
            .ok_or_else(|| Error::Validation(format!("initial state {initial} not declared")))?;
        let mut transitions = vec![vec![None; alphabet.size()]; labels.len()];
        for &(src, letter, dst) in edges {
            let s = find(src).ok_or_else(|| {
                Error::Validation(format!("edge {src} {letter} {dst}: unknown source"))
            })?;
            let t = find(dst).ok_or_else(|| {
                Error::Validation(format!("edge {src} {letter} {dst}: unknown target"))
            })?;
            let l = alphabet.letter(letter).map_err(|_| {
                Error::Validation(format!("edge {src} {letter} {dst}: letter out of range"))
            })?;
            let slot = &mut transitions[s][l.index()];
            if slot.is_some() {
                return Err(Error::Validation(format!(
                    "state {src} has two edges labelled {letter}"
                )));
            }
            *slot = Some(t);
        }
        Ok(Self {
            alphabet,
            labels,
            initial: initial_id,
            transitions,
            free: false,
        })
    }

    pub fn alphabet(&self) -> &GeneratorAlphabet {
        &self.alphabet
    }

    /// True for the built-in free-group automaton.
    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn label(&self, s: StateId) -> u32 {
        self.labels[s]
    }

    pub fn step(&self, s: StateId, l: Letter) -> Option<StateId> {
        self.transitions[s][l.index()]
    }

    /// Outgoing edges in increasing letter order.
    pub fn out_edges(&self, s: StateId) -> impl Iterator<Item = (Letter, StateId)> + '_ {
        self.transitions[s]
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (Letter(i as u16 + 1), t)))
    }

    pub fn out_degree(&self, s: StateId) -> usize {
        self.transitions[s].iter().filter(|t| t.is_some()).count()
    }

    /// State reached from `from` by reading `letters`.
    pub fn run_from(&self, from: StateId, letters: &[Letter]) -> Option<StateId> {
        let mut s = from;
        for &l in letters {
            s = self.step(s, l)?;
        }
        Some(s)
    }

    /// The cone type of `w`, i.e. the state reached from the initial state.
    pub fn cone_type(&self, w: &GroupWord) -> Option<StateId> {
        self.run_from(self.initial, w.letters())
    }

    /// Membership of `eta` in the cone type represented by `state`.
    pub fn in_cone(&self, state: StateId, eta: &GroupWord) -> bool {
        self.run_from(state, eta.letters()).is_some()
    }

    /// States lying on a cycle: the maximal recurrent subgraph.
    pub fn recurrent_states(&self) -> Vec<StateId> {
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.n_states()).map(|_| g.add_node(())).collect();
        for s in 0..self.n_states() {
            for (_, t) in self.out_edges(s) {
                g.add_edge(nodes[s], nodes[t], ());
            }
        }
        let mut out = BTreeSet::new();
        for comp in tarjan_scc(&g) {
            let cyclic = comp.len() > 1
                || comp
                    .first()
                    .map(|&n| self.out_edges(n.index()).any(|(_, t)| t == n.index()))
                    .unwrap_or(false);
            if cyclic {
                out.extend(comp.iter().map(|n| n.index()));
            }
        }
        out.into_iter().collect()
    }

    /// States from which arbitrarily long paths start.
    pub fn live_states(&self) -> Vec<bool> {
        let mut live = vec![false; self.n_states()];
        for s in self.recurrent_states() {
            live[s] = true;
        }
        loop {
            let mut changed = false;
            for s in 0..self.n_states() {
                if !live[s] && self.out_edges(s).any(|(_, t)| live[t]) {
                    live[s] = true;
                    changed = true;
                }
            }
            if !changed {
                return live;
            }
        }
    }

    /// Number of accepted words of length exactly `k`.
    pub fn sphere_size(&self, k: usize) -> u128 {
        let mut counts = vec![0u128; self.n_states()];
        counts[self.initial] = 1;
        for _ in 0..k {
            let mut next = vec![0u128; self.n_states()];
            for s in 0..self.n_states() {
                if counts[s] > 0 {
                    for (_, t) in self.out_edges(s) {
                        next[t] = next[t].saturating_add(counts[s]);
                    }
                }
            }
            counts = next;
        }
        counts.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }

    pub fn ball_size(&self, radius: usize) -> u128 {
        (0..=radius).fold(0u128, |a, k| a.saturating_add(self.sphere_size(k)))
    }

    /// Words of length `radius` in lexicographic letter order.
    pub fn sphere(&self, radius: usize) -> SphereIter<'_> {
        SphereIter::new(self, radius)
    }

    /// Words of length at most `radius`, by increasing length.
    pub fn ball(&self, radius: usize) -> Vec<GroupWord> {
        (0..=radius).flat_map(|k| self.sphere(k)).collect()
    }

    /// Lexicographically least label of a length-`k` path from `c1` to `c2`.
    pub fn nested_pair(&self, c1: StateId, c2: StateId, k: usize) -> Option<GroupWord> {
        let n = self.n_states();
        // reach[j][s]: c2 reachable from s in exactly j steps
        let mut reach = vec![vec![false; n]; k + 1];
        reach[0][c2] = true;
        for j in 1..=k {
            for s in 0..n {
                reach[j][s] = self.out_edges(s).any(|(_, t)| reach[j - 1][t]);
            }
        }
        if !reach[k][c1] {
            return None;
        }
        let mut s = c1;
        let mut letters = Vec::with_capacity(k);
        for j in (0..k).rev() {
            let (l, t) = self.out_edges(s).find(|&(_, t)| reach[j][t])?;
            letters.push(l);
            s = t;
        }
        Some(GroupWord::from_letters(letters))
    }

    /// Extends a path from `state` by `depth` letters, walking uniformly
    /// over edges that lead to live states.
    pub fn random_path<R: Rng>(
        &self,
        state: StateId,
        depth: usize,
        rng: &mut R,
        live: &[bool],
    ) -> Vec<Letter> {
        let mut s = state;
        let mut out = Vec::with_capacity(depth);
        let mut choices: Vec<(Letter, StateId)> = Vec::with_capacity(self.alphabet.size());
        for _ in 0..depth {
            choices.clear();
            choices.extend(self.out_edges(s).filter(|&(_, t)| live[t]));
            if choices.is_empty() {
                break;
            }
            let (l, t) = choices[rng.random_range(0..choices.len())];
            out.push(l);
            s = t;
        }
        out
    }

    /// `count` rays of length `depth`, each drawn by a uniform walk on
    /// live states with its own random stream.
    pub fn sample_boundary_rays(&self, count: usize, depth: usize, seed: u64) -> Vec<BoundaryRay> {
        let live = self.live_states();
        (0..count)
            .map(|i| {
                let mut rng = ray_rng(seed, i as u64);
                let letters = self.random_path(self.initial, depth, &mut rng, &live);
                BoundaryRay { letters, seed }
            })
            .collect()
    }

    /// Transition table relabelled by breadth-first order from the initial
    /// state; equal tables mean isomorphic automata.
    pub fn canonical_table(&self) -> Vec<Vec<Option<usize>>> {
        let mut order = vec![usize::MAX; self.n_states()];
        let mut queue = std::collections::VecDeque::new();
        let mut next = 0;
        order[self.initial] = 0;
        next += 1;
        queue.push_back(self.initial);
        let mut seq = vec![self.initial];
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.out_edges(s) {
                if order[t] == usize::MAX {
                    order[t] = next;
                    next += 1;
                    queue.push_back(t);
                    seq.push(t);
                }
            }
        }
        seq.iter()
            .map(|&s| {
                self.transitions[s]
                    .iter()
                    .map(|t| t.map(|t| order[t]))
                    .collect()
            })
            .collect()
    }

    /// Serializes in the line-oriented automaton format.
    pub fn to_text(&self) -> String {
        let mut out = format!("alphabet n={}\n", self.alphabet.rank());
        for &l in &self.labels {
            out.push_str(&format!("state {l}\n"));
        }
        out.push_str(&format!("initial {}\n", self.labels[self.initial]));
        for s in 0..self.n_states() {
            for (l, t) in self.out_edges(s) {
                out.push_str(&format!(
                    "edge {} {} {}\n",
                    self.labels[s], l.0, self.labels[t]
                ));
            }
        }
        out
    }

    /// Parses the automaton text format. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut alphabet = None;
        let mut states = Vec::new();
        let mut initial = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let num = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| perr(&format!("bad integer `{s}`")))
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "alphabet" => {
                    let arg = toks.get(1).and_then(|t| t.strip_prefix("n="));
                    let n = num(arg.ok_or_else(|| perr("expected `alphabet n=<int>`"))?)?;
                    if n == 0 || n > u16::MAX as u32 / 2 || toks.len() != 2 {
                        return Err(perr("bad alphabet size"));
                    }
                    alphabet = Some(GeneratorAlphabet::new(n as u16));
                }
                "state" if toks.len() == 2 => states.push(num(toks[1])?),
                "initial" if toks.len() == 2 => {
                    if initial.is_some() {
                        return Err(perr("initial state given twice"));
                    }
                    initial = Some(num(toks[1])?);
                }
                "edge" if toks.len() == 4 => {
                    edges.push((num(toks[1])?, num(toks[2])?, num(toks[3])?))
                }
                _ => return Err(perr(&format!("unrecognized line `{line}`"))),
            }
        }
        let alphabet =
            alphabet.ok_or_else(|| Error::Validation("missing `alphabet n=` header".into()))?;
        let initial = initial.ok_or_else(|| Error::Validation("missing initial state".into()))?;
        Self::from_parts(alphabet, &states, initial, &edges)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

pub(crate) fn ray_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Lexicographic enumeration of the words of a fixed length.
pub struct SphereIter<'a> {
    automaton: &'a GeodesicAutomaton,
    radius: usize,
    states: Vec<StateId>,
    word: Vec<Letter>,
    started: bool,
    done: bool,
}

impl<'a> SphereIter<'a> {
    fn new(automaton: &'a GeodesicAutomaton, radius: usize) -> Self {
        Self {
            automaton,
            radius,
            states: vec![automaton.initial],
            word: Vec::with_capacity(radius),
            started: false,
            done: false,
        }
    }

    /// Extends the current prefix with least letters until it has full
    /// length; returns false at a dead end.
    fn descend(&mut self) -> bool {
        while self.word.len() < self.radius {
            let s = *self.states.last().unwrap();
            match self.automaton.out_edges(s).next() {
                Some((l, t)) => {
                    self.word.push(l);
                    self.states.push(t);
                }
                None => return false,
            }
        }
        true
    }

    /// Moves to the next prefix in lexicographic order; false when exhausted.
    fn advance(&mut self) -> bool {
        loop {
            let Some(last) = self.word.pop() else {
                return false;
            };
            self.states.pop();
            let s = *self.states.last().unwrap();
            if let Some((l, t)) = self.automaton.out_edges(s).find(|&(l, _)| l > last) {
                self.word.push(l);
                self.states.push(t);
                return true;
            }
        }
    }
}

impl Iterator for SphereIter<'_> {
    type Item = GroupWord;

    fn next(&mut self) -> Option<GroupWord> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.descend() {
                return Some(GroupWord::from_letters(self.word.clone()));
            }
        }
        loop {
            if !self.advance() {
                self.done = true;
                return None;
            }
            if self.descend() {
                return Some(GroupWord::from_letters(self.word.clone()));
            }
        }
    }
}

/// Finite prefix of a geodesic ray from the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryRay {
    letters: Vec<Letter>,
    pub seed: u64,
}

impl BoundaryRay {
    pub fn from_letters(letters: Vec<Letter>, seed: u64) -> Self {
        Self { letters, seed }
    }

    /// The ray `w w w ...` truncated to `depth`; `w` must be cyclically
    /// reduced so every prefix is geodesic.
    pub fn periodic(w: &GroupWord, depth: usize) -> Result<Self> {
        if w.is_empty() || !w.is_reduced() || w.letters()[0] == w.last().unwrap().inverse() {
            return Err(Error::InvalidInput(format!(
                "{w} is not cyclically reduced"
            )));
        }
        let letters = w.letters().iter().copied().cycle().take(depth).collect();
        Ok(Self { letters, seed: 0 })
    }

    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn prefix(&self, n: usize) -> GroupWord {
        GroupWord::from_letters(self.letters[..n.min(self.letters.len())].to_vec())
    }

    /// The ray with its first `k` letters removed.
    pub fn shifted(&self, k: usize) -> Self {
        Self {
            letters: self.letters[k.min(self.letters.len())..].to_vec(),
            seed: self.seed,
        }
    }

    /// Free-group translate `gamma * ray`, reduced.
    pub fn translate(&self, gamma: &GroupWord) -> Self {
        let w = gamma.mul(&GroupWord::from_letters(self.letters.clone()));
        Self {
            letters: w.letters().to_vec(),
            seed: self.seed,
        }
    }

    pub fn common_prefix(&self, other: &BoundaryRay) -> usize {
        self.letters
            .iter()
            .zip(&other.letters)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for BoundaryRay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", GroupWord::from_letters(self.letters.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> GeodesicAutomaton {
        GeodesicAutomaton::free(GeneratorAlphabet::new(2))
    }

    #[test]
    fn reduction_examples() {
        let al = GeneratorAlphabet::new(2);
        assert!(reduce(&[1, 2], &al).unwrap().is_empty());
        let w = reduce(&[1, 3, 4, 1], &al).unwrap();
        assert_eq!(w.letters(), &[Letter(1), Letter(1)]);
        let r = reduce(&[1, 3, 2], &al).unwrap();
        assert_eq!(r.letters(), &[Letter(1), Letter(3), Letter(2)]);
        assert_eq!(reduce(&[5], &al), Err(Error::UnknownLetter(5)));
        assert_eq!(w.to_string(), "aa");
        assert_eq!(GroupWord::parse("abBA", &al).unwrap(), GroupWord::empty());
    }

    #[test]
    fn cone_types_of_free_group() {
        let a = f2();
        let al = *a.alphabet();
        assert_eq!(a.cone_type(&GroupWord::empty()), Some(a.initial()));
        let ab = GroupWord::parse("ab", &al).unwrap();
        let b = GroupWord::parse("b", &al).unwrap();
        assert_eq!(a.cone_type(&ab), a.cone_type(&b));
        assert_eq!(a.n_states(), 5);
    }

    #[test]
    fn out_degrees_and_recurrence() {
        let a = f2();
        assert_eq!(a.out_degree(a.initial()), 4);
        for s in 1..5 {
            assert_eq!(a.out_degree(s), 3);
        }
        assert_eq!(a.recurrent_states(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn sphere_sizes() {
        let a = f2();
        assert_eq!(a.sphere(1).count(), 4);
        assert_eq!(a.sphere(2).count(), 12);
        assert_eq!(a.ball(3).len(), 53);
        for k in 1..=12 {
            assert_eq!(a.sphere_size(k), 4 * 3u128.pow(k as u32 - 1));
        }
        let words: Vec<GroupWord> = a.sphere(3).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        assert_eq!(a.sphere(0).count(), 1);
    }

    #[test]
    fn nested_pairs() {
        let a = f2();
        let sa = a
            .cone_type(&GroupWord::from_letters(vec![Letter(1)]))
            .unwrap();
        let sb = a
            .cone_type(&GroupWord::from_letters(vec![Letter(3)]))
            .unwrap();
        let sai = a
            .cone_type(&GroupWord::from_letters(vec![Letter(2)]))
            .unwrap();
        assert_eq!(a.nested_pair(sa, sb, 1).unwrap().letters(), &[Letter(3)]);
        assert!(a.nested_pair(sa, sai, 1).is_none());
        for &c1 in &a.recurrent_states() {
            for &c2 in &a.recurrent_states() {
                assert_eq!(a.nested_pair(c1, c2, 3).unwrap().len(), 3);
            }
        }
    }

    #[test]
    fn text_round_trip_and_validation() {
        let a = f2();
        let b = GeodesicAutomaton::parse(&a.to_text()).unwrap();
        assert_eq!(a.canonical_table(), b.canonical_table());
        let dup = "alphabet n=1\nstate 0\nstate 1\ninitial 0\nedge 0 1 1\nedge 0 1 0\n";
        assert!(matches!(
            GeodesicAutomaton::parse(dup),
            Err(Error::Validation(_))
        ));
        let bad = "alphabet n=1\nstate 0\ninitial 0\nedge zero 1 0\n";
        assert!(matches!(
            GeodesicAutomaton::parse(bad),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn ray_sampling() {
        let a = f2();
        let r1 = a.sample_boundary_rays(100, 30, 7);
        let r2 = a.sample_boundary_rays(100, 30, 7);
        assert_eq!(r1, r2);
        let distinct: BTreeSet<Vec<Letter>> = r1.iter().map(|r| r.letters().to_vec()).collect();
        assert_eq!(distinct.len(), 100);
        for r in &r1 {
            assert_eq!(r.depth(), 30);
            assert!(r.prefix(30).is_reduced());
        }
        let p = BoundaryRay::periodic(&GroupWord::from_letters(vec![Letter(1)]), 5).unwrap();
        assert_eq!(p.letters(), &[Letter(1); 5]);
        let aba = GroupWord::from_letters(vec![Letter(1), Letter(3), Letter(2)]);
        assert!(BoundaryRay::periodic(&aba, 6).is_err());
    }
}
