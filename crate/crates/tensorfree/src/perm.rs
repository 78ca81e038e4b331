//! Permutations of `[p]`, their cycle structure, the geodesic order, the
//! non-crossing lattices `S_NC(β)`, Möbius functions and set partitions.
//!
//! Internally everything is 0-based; the text format is 1-based cycle
//! notation such as `(1 7 3)(2 5 6 4)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default upper bound on the number of elements `enumerate_snc` may produce.
pub const DEFAULT_SNC_CAP: u64 = 1_000_000;

pub const CATALAN: [u64; 31] = {
    let mut c = [0u64; 31];
    c[0] = 1;
    let mut n = 1;
    while n <= 30 {
        // C_n = C_{n-1} * 2(2n-1) / (n+1), exact in u128
        c[n] = ((c[n - 1] as u128 * (2 * (2 * n as u128 - 1))) / (n as u128 + 1)) as u64;
        n += 1;
    }
    c
};

/// The Catalan number `Cat_n`, available for `n <= 30`.
pub fn catalan(n: usize) -> Result<u64> {
    CATALAN
        .get(n)
        .copied()
        .ok_or(Error::Overflow("Catalan numbers are tabulated up to n = 30"))
}

/// A bijection of `{0, …, p-1}` stored by its images.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    img: Vec<usize>,
}

impl Permutation {
    pub fn identity(p: usize) -> Self {
        Permutation { img: (0..p).collect() }
    }

    /// The full cycle `γ_p = (1 2 … p)`.
    pub fn full_cycle(p: usize) -> Self {
        Permutation {
            img: (0..p).map(|i| (i + 1) % p.max(1)).collect(),
        }
    }

    pub fn from_images(img: Vec<usize>) -> Result<Self> {
        let p = img.len();
        let mut seen = vec![false; p];
        for &v in &img {
            if v >= p || seen[v] {
                return Err(Error::Invalid(format!("{img:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(Permutation { img })
    }

    /// Build from 0-based cycles; points not mentioned are fixed.
    pub fn from_cycles(p: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut img: Vec<usize> = (0..p).collect();
        let mut seen = vec![false; p];
        for c in cycles {
            for (k, &a) in c.iter().enumerate() {
                if a >= p || seen[a] {
                    return Err(Error::Invalid(format!("bad cycle {c:?} for p = {p}")));
                }
                seen[a] = true;
                img[a] = c[(k + 1) % c.len()];
            }
        }
        Ok(Permutation { img })
    }

    /// The transposition exchanging `a` and `b` (0-based).
    pub fn transposition(p: usize, a: usize, b: usize) -> Self {
        let mut img: Vec<usize> = (0..p).collect();
        img.swap(a, b);
        Permutation { img }
    }

    /// Parse 1-based cycle notation. Singletons may be omitted, in which case
    /// `p` must be supplied; otherwise `p` is the largest point mentioned.
    pub fn parse(s: &str, p: Option<usize>) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            if !rest.starts_with('(') {
                return Err(Error::Parse(format!("expected '(' in {s:?}")));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cycle in {s:?}")))?;
            let body = &rest[1..close];
            let mut c = Vec::new();
            for tok in body.split(|ch: char| ch.is_whitespace() || ch == ',') {
                if tok.is_empty() {
                    continue;
                }
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad point {tok:?} in {s:?}")))?;
                if v == 0 {
                    return Err(Error::Parse("points are 1-based".into()));
                }
                c.push(v - 1);
            }
            cycles.push(c);
            rest = rest[close + 1..].trim_start();
        }
        let max = cycles.iter().flatten().map(|&v| v + 1).max().unwrap_or(0);
        let p = match p {
            Some(p) if p < max => {
                return Err(Error::Parse(format!("{s:?} mentions {max} > p = {p}")));
            }
            Some(p) => p,
            None => max,
        };
        Self::from_cycles(p, &cycles)
    }

    pub fn p(&self) -> usize {
        self.img.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.img
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.img[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.p()];
        for (i, &v) in self.img.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { img: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.p(), other.p(), "composing permutations of different order");
        Permutation {
            img: other.img.iter().map(|&i| self.img[i]).collect(),
        }
    }

    /// `σ self σ⁻¹`.
    pub fn conjugate_by(&self, sigma: &Self) -> Self {
        let mut img = vec![0; self.p()];
        for i in 0..self.p() {
            img[sigma.img[i]] = sigma.img[self.img[i]];
        }
        Permutation { img }
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Cycles, each starting from its minimal element, sorted by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let p = self.p();
        let mut seen = vec![false; p];
        let mut out = Vec::new();
        for start in 0..p {
            if seen[start] {
                continue;
            }
            let mut c = Vec::new();
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                c.push(j);
                j = self.img[j];
            }
            out.push(c);
        }
        out
    }

    /// `#σ`, the number of cycles.
    pub fn num_cycles(&self) -> usize {
        let p = self.p();
        let mut seen = vec![false; p];
        let mut n = 0;
        for start in 0..p {
            if !seen[start] {
                n += 1;
                let mut j = start;
                while !seen[j] {
                    seen[j] = true;
                    j = self.img[j];
                }
            }
        }
        n
    }

    /// `|σ| = p - #σ`, the minimal number of transpositions.
    pub fn length(&self) -> usize {
        self.p() - self.num_cycles()
    }

    /// `Π(σ)`, the partition into cycle supports.
    pub fn partition(&self) -> Partition {
        Partition::from_blocks_unchecked(self.p(), self.cycles())
    }

    /// Disjoint union: `self` on `[p]` and `other` shifted onto `p + [q]`.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let p = self.p();
        let mut img = self.img.clone();
        img.extend(other.img.iter().map(|&v| v + p));
        Permutation { img }
    }

    /// The permutation induced on `subset` by first return, relabelled to
    /// `0..subset.len()` following the order of `subset`.
    pub fn first_return(&self, subset: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.p()];
        for (k, &a) in subset.iter().enumerate() {
            pos[a] = k;
        }
        let img = subset
            .iter()
            .map(|&a| {
                let mut j = self.img[a];
                while pos[j] == usize::MAX {
                    j = self.img[j];
                }
                pos[j]
            })
            .collect();
        Permutation { img }
    }

    /// Erase the point `j` and shift the points above it down by one.
    pub fn erase(&self, j: usize) -> Self {
        let keep: Vec<usize> = (0..self.p()).filter(|&k| k != j).collect();
        self.first_return(&keep)
    }

    /// The cycle type as a sorted (descending) list of cycle lengths.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// Iterate over all of `S_p` in lexicographic order of image vectors.
    pub fn all(p: usize) -> AllPerms {
        AllPerms {
            next: Some((0..p).collect()),
        }
    }

    /// Position of `self` in the lexicographic enumeration of `S_p`.
    pub fn rank(&self) -> usize {
        let p = self.p();
        let mut used = vec![false; p];
        let mut r = 0;
        for i in 0..p {
            let v = self.img[i];
            let smaller = (0..v).filter(|&u| !used[u]).count();
            r = r * (p - i) + smaller;
            used[v] = true;
        }
        r
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p() == 0 {
            return write!(f, "()");
        }
        for c in self.cycles() {
            write!(f, "(")?;
            for (k, v) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", v + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Permutation::parse(s, None)
    }
}

/// Lexicographic iterator over `S_p`.
pub struct AllPerms {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPerms {
    type Item = Permutation;
    fn next(&mut self) -> Option<Permutation> {
        let cur = self.next.take()?;
        let mut a = cur.clone();
        // next lexicographic permutation
        let n = a.len();
        if n >= 2 {
            let mut i = n - 1;
            while i > 0 && a[i - 1] >= a[i] {
                i -= 1;
            }
            if i > 0 {
                let mut j = n - 1;
                while a[j] <= a[i - 1] {
                    j -= 1;
                }
                a.swap(i - 1, j);
                a[i..].reverse();
                self.next = Some(a);
            }
        }
        Some(Permutation { img: cur })
    }
}

/// `α ≤ β` in the geodesic order: `|α| + |α⁻¹β| = |β|`.
pub fn is_geodesic(alpha: &Permutation, beta: &Permutation) -> Result<bool> {
    if alpha.p() != beta.p() {
        return Err(Error::Dimension(format!(
            "permutations of order {} and {}",
            alpha.p(),
            beta.p()
        )));
    }
    Ok(alpha.length() + alpha.inverse().compose(beta).length() == beta.length())
}

/// `Möb(σ) = ∏_c (-1)^{|c|} Cat_{|c|}` with `|c|` the cycle size minus one.
pub fn mobius(sigma: &Permutation) -> i64 {
    sigma
        .cycles()
        .iter()
        .map(|c| {
            let n = c.len() - 1;
            let cat = CATALAN[n] as i64;
            if n % 2 == 0 {
                cat
            } else {
                -cat
            }
        })
        .product()
}

/// The number of elements of `S_NC(β)`, i.e. `∏_c Cat_{|c|+1}` over cycles of size `|c|+1`.
pub fn snc_size(beta: &Permutation) -> Result<u64> {
    let mut n: u64 = 1;
    for c in beta.cycles() {
        n = n
            .checked_mul(catalan(c.len())?)
            .ok_or(Error::Overflow("S_NC size overflows u64"))?;
    }
    Ok(n)
}

pub fn enumerate_snc(beta: &Permutation) -> Result<Vec<Permutation>> {
    enumerate_snc_capped(beta, DEFAULT_SNC_CAP)
}

/// All `α ≤ β`, built per cycle of `β` from non-crossing partitions of that
/// cycle read in its cyclic order.
pub fn enumerate_snc_capped(beta: &Permutation, cap: u64) -> Result<Vec<Permutation>> {
    let size = snc_size(beta)?;
    if size > cap {
        return Err(Error::Resource(format!(
            "S_NC({beta}) has {size} elements, cap is {cap}"
        )));
    }
    let p = beta.p();
    let mut out = vec![Permutation::identity(p)];
    for cyc in beta.cycles() {
        let n = cyc.len();
        if n == 1 {
            continue;
        }
        let ncs = noncrossing_partitions(n);
        let mut next = Vec::with_capacity(out.len() * ncs.len());
        for base in &out {
            for nc in &ncs {
                let mut img = base.img.clone();
                for block in nc {
                    for (k, &pos) in block.iter().enumerate() {
                        img[cyc[pos]] = cyc[block[(k + 1) % block.len()]];
                    }
                }
                next.push(Permutation { img });
            }
        }
        out = next;
    }
    Ok(out)
}

/// Non-crossing partitions of `0..n`, each as a list of increasing blocks.
pub fn noncrossing_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
        // non-crossing partitions of lo..hi
        if lo >= hi {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        // choose the block of `lo`: lo = b0 < b1 < … < bk, gaps are independent
        let rest: Vec<usize> = (lo + 1..hi).collect();
        let m = rest.len();
        for mask in 0u64..(1u64 << m) {
            let mut block = vec![lo];
            block.extend((0..m).filter(|&t| mask >> t & 1 == 1).map(|t| rest[t]));
            let mut parts: Vec<Vec<Vec<Vec<usize>>>> = Vec::new();
            for w in 0..block.len() {
                let a = block[w] + 1;
                let b = if w + 1 < block.len() { block[w + 1] } else { hi };
                parts.push(rec(a, b));
            }
            let mut acc: Vec<Vec<Vec<usize>>> = vec![vec![block.clone()]];
            for part in parts {
                let mut nacc = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for q in &part {
                        let mut v = a.clone();
                        v.extend(q.iter().cloned());
                        nacc.push(v);
                    }
                }
                acc = nacc;
            }
            out.extend(acc);
        }
        out
    }
    let mut v = rec(0, n);
    for part in &mut v {
        part.sort();
    }
    v
}

/// Lift a partition to the unique element of `S_NC(sigma)` with that cycle
/// partition, by taking first-return maps of `sigma` on each block.
/// Fails if the partition is not refined by `Π(sigma)` in a non-crossing way.
pub fn lift_partition(pi: &Partition, sigma: &Permutation) -> Result<Permutation> {
    let p = sigma.p();
    let mut img = vec![0; p];
    for block in pi.blocks() {
        let sub = sigma.first_return(block);
        for (k, &a) in block.iter().enumerate() {
            img[a] = block[sub.img[k]];
        }
    }
    let lifted = Permutation { img };
    if lifted.partition() != *pi || !is_geodesic(&lifted, sigma)? {
        return Err(Error::Invalid(format!(
            "partition {pi} does not lift into S_NC({sigma})"
        )));
    }
    Ok(lifted)
}

/// Meet in the geodesic order. The result does not depend on the ambient
/// element of `S_p` both arguments lie under.
pub fn meet_snc(alpha: &Permutation, beta: &Permutation) -> Result<Permutation> {
    if alpha.p() != beta.p() {
        return Err(Error::Dimension("meet of permutations of different order".into()));
    }
    let m = alpha.partition().meet(&beta.partition());
    let lifted = lift_partition(&m, alpha)?;
    if !is_geodesic(&lifted, beta)? {
        return Err(Error::Invalid(format!(
            "{alpha} and {beta} have no common upper bound"
        )));
    }
    Ok(lifted)
}

/// Join of `alpha` and `beta` inside the lattice `S_NC(sigma)`.
pub fn join_snc(alpha: &Permutation, beta: &Permutation, sigma: &Permutation) -> Result<Permutation> {
    if alpha.p() != sigma.p() || beta.p() != sigma.p() {
        return Err(Error::Dimension("join of permutations of different order".into()));
    }
    if !is_geodesic(alpha, sigma)? || !is_geodesic(beta, sigma)? {
        return Err(Error::Invalid(format!(
            "{alpha} or {beta} is not in S_NC({sigma})"
        )));
    }
    let j = alpha.partition().join(&beta.partition());
    let closed = noncrossing_closure(&j, sigma);
    lift_partition(&closed, sigma)
}

/// Join of several elements of `S_NC(sigma)` inside that lattice.
pub fn join_all_snc(perms: &[Permutation], sigma: &Permutation) -> Result<Permutation> {
    let mut acc = Permutation::identity(sigma.p());
    for a in perms {
        if !is_geodesic(a, sigma)? {
            return Err(Error::Invalid(format!("{a} is not in S_NC({sigma})")));
        }
    }
    let mut part = acc.partition();
    for a in perms {
        part = part.join(&a.partition());
    }
    let closed = noncrossing_closure(&part, sigma);
    acc = lift_partition(&closed, sigma)?;
    Ok(acc)
}

/// Smallest partition above `pi` which is non-crossing with respect to the
/// cyclic orders of the cycles of `sigma` (blocks of `pi` must lie inside
/// cycles of `sigma`).
fn noncrossing_closure(pi: &Partition, sigma: &Permutation) -> Partition {
    let p = sigma.p();
    let mut pos = vec![0usize; p];
    let mut cyc_of = vec![0usize; p];
    for (ci, c) in sigma.cycles().iter().enumerate() {
        for (k, &a) in c.iter().enumerate() {
            pos[a] = k;
            cyc_of[a] = ci;
        }
    }
    let mut labels = pi.labels();
    loop {
        let part = Partition::from_labels(&labels);
        let blocks = part.blocks().to_vec();
        let mut merged = false;
        'outer: for x in 0..blocks.len() {
            for y in x + 1..blocks.len() {
                let (bx, by) = (&blocks[x], &blocks[y]);
                if cyc_of[bx[0]] != cyc_of[by[0]] {
                    continue;
                }
                let px: Vec<usize> = bx.iter().map(|&a| pos[a]).collect();
                let py: Vec<usize> = by.iter().map(|&a| pos[a]).collect();
                if crosses(&px, &py) {
                    let (lx, ly) = (labels[bx[0]], labels[by[0]]);
                    for l in labels.iter_mut() {
                        if *l == ly {
                            *l = lx;
                        }
                    }
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return part;
        }
    }
}

fn crosses(a: &[usize], b: &[usize]) -> bool {
    for &a1 in a {
        for &a2 in a {
            if a1 >= a2 {
                continue;
            }
            let inside = b.iter().any(|&v| a1 < v && v < a2);
            let outside = b.iter().any(|&v| v < a1 || v > a2);
            if inside && outside {
                return true;
            }
        }
    }
    false
}

/// `α^π`: the maximal `β ≤ α` with `Π(β) ≤ π` whose cycles are runs of
/// cyclically consecutive elements of cycles of `α`.
pub fn alpha_over_pi(alpha: &Permutation, pi: &Partition) -> Result<Permutation> {
    if alpha.p() != pi.p() {
        return Err(Error::Dimension("alpha_over_pi order mismatch".into()));
    }
    let lab = pi.labels();
    let mut cycles = Vec::new();
    for c in alpha.cycles() {
        let n = c.len();
        let start = (0..n).find(|&k| lab[c[k]] != lab[c[(k + n - 1) % n]]);
        match start {
            None => cycles.push(c),
            Some(s) => {
                let mut run = vec![c[s]];
                for t in 1..n {
                    let a = c[(s + t) % n];
                    if lab[a] == lab[*run.last().unwrap()] {
                        run.push(a);
                    } else {
                        cycles.push(std::mem::replace(&mut run, vec![a]));
                    }
                }
                cycles.push(run);
            }
        }
    }
    Permutation::from_cycles(alpha.p(), &cycles)
}

/// A set partition of `{0, …, p-1}`, stored with sorted blocks ordered by
/// their minimal element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    p: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    fn from_blocks_unchecked(p: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        Partition { p, blocks }
    }

    pub fn from_blocks(p: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; p];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Invalid("empty block".into()));
            }
            for &a in b {
                if a >= p || seen[a] {
                    return Err(Error::Invalid(format!("blocks {blocks:?} are not a partition of [{p}]")));
                }
                seen[a] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Invalid(format!("blocks {blocks:?} do not cover [{p}]")));
        }
        Ok(Self::from_blocks_unchecked(p, blocks))
    }

    /// Blocks are the classes of equal labels.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let p = labels.len();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut rep: Vec<usize> = Vec::new();
        for i in 0..p {
            match rep.iter().position(|&r| labels[r] == labels[i]) {
                Some(b) => blocks[b].push(i),
                None => {
                    rep.push(i);
                    blocks.push(vec![i]);
                }
            }
        }
        Self::from_blocks_unchecked(p, blocks)
    }

    /// `0_p`, all singletons.
    pub fn zero(p: usize) -> Self {
        Partition { p, blocks: (0..p).map(|i| vec![i]).collect() }
    }

    /// `1_p`, a single block.
    pub fn one(p: usize) -> Self {
        let blocks = if p == 0 { vec![] } else { vec![(0..p).collect()] };
        Partition { p, blocks }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of each point.
    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.p];
        for (b, block) in self.blocks.iter().enumerate() {
            for &a in block {
                l[a] = b;
            }
        }
        l
    }

    /// Refinement order: every block of `self` lies in a block of `other`.
    pub fn leq(&self, other: &Self) -> bool {
        let lo = other.labels();
        self.blocks.iter().all(|b| b.iter().all(|&a| lo[a] == lo[b[0]]))
    }

    pub fn meet(&self, other: &Self) -> Self {
        let (l1, l2) = (self.labels(), other.labels());
        let pairs: Vec<(usize, usize)> = l1.into_iter().zip(l2).collect();
        Partition::from_labels(&pairs)
    }

    pub fn join(&self, other: &Self) -> Self {
        let mut uf = UnionFind::new(self.p);
        for b in self.blocks.iter().chain(other.blocks.iter()) {
            for &a in &b[1..] {
                uf.union(b[0], a);
            }
        }
        uf.partition()
    }

    pub fn is_noncrossing(&self) -> bool {
        for x in 0..self.blocks.len() {
            for y in x + 1..self.blocks.len() {
                if crosses(&self.blocks[x], &self.blocks[y]) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether every block has exactly two elements.
    pub fn is_pair_partition(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }

    /// The permutation whose cycles are the blocks, each in increasing order.
    pub fn to_increasing_perm(&self) -> Permutation {
        Permutation::from_cycles(self.p, &self.blocks).expect("blocks form a partition")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (t, a) in b.iter().enumerate() {
                if t > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", a + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `ker f`: the partition into nonempty preimages.
pub fn kernel_partition<T: PartialEq>(f: &[T]) -> Partition {
    Partition::from_labels(f)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    pub(crate) fn partition(&mut self) -> Partition {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|a| self.find(a)).collect();
        Partition::from_labels(&roots)
    }
}

/// An `r`-tuple of permutations of the same `[p]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermTuple {
    perms: Vec<Permutation>,
}

impl PermTuple {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        if let Some(first) = perms.first() {
            if perms.iter().any(|a| a.p() != first.p()) {
                return Err(Error::Dimension("tuple entries have different orders".into()));
            }
        }
        Ok(PermTuple { perms })
    }

    /// The same permutation on all `r` legs.
    pub fn constant(sigma: &Permutation, r: usize) -> Self {
        PermTuple { perms: vec![sigma.clone(); r] }
    }

    pub fn identity(p: usize, r: usize) -> Self {
        Self::constant(&Permutation::identity(p), r)
    }

    /// Parse a `;`-separated list of cycle-notation permutations.
    pub fn parse(s: &str, p: Option<usize>) -> Result<Self> {
        let parts: Vec<&str> = s.split(';').collect();
        let p = match p {
            Some(p) => p,
            None => {
                let mut m = 0;
                for part in &parts {
                    m = m.max(Permutation::parse(part, None)?.p());
                }
                m
            }
        };
        let perms = parts
            .iter()
            .map(|s| Permutation::parse(s, Some(p)))
            .collect::<Result<Vec<_>>>()?;
        PermTuple::new(perms)
    }

    pub fn p(&self) -> usize {
        self.perms.first().map_or(0, Permutation::p)
    }

    pub fn r(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn get(&self, s: usize) -> &Permutation {
        &self.perms[s]
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(Permutation::is_identity)
    }

    /// Componentwise geodesic order.
    pub fn leq(&self, other: &Self) -> bool {
        self.r() == other.r()
            && self
                .perms
                .iter()
                .zip(&other.perms)
                .all(|(a, b)| is_geodesic(a, b).unwrap_or(false))
    }

    pub fn inverse(&self) -> Self {
        PermTuple { perms: self.perms.iter().map(Permutation::inverse).collect() }
    }

    /// Componentwise `self⁻¹ other`.
    pub fn left_divide(&self, other: &Self) -> Self {
        PermTuple {
            perms: self
                .perms
                .iter()
                .zip(&other.perms)
                .map(|(a, b)| a.inverse().compose(b))
                .collect(),
        }
    }

    pub fn conjugate_by(&self, sigma: &Permutation) -> Self {
        PermTuple { perms: self.perms.iter().map(|a| a.conjugate_by(sigma)).collect() }
    }

    /// `∏_s Möb(α_s)`.
    pub fn mobius(&self) -> i64 {
        self.perms.iter().map(mobius).product()
    }

    /// `⋁_s Π(α_s)` in the partition lattice.
    pub fn join_partition(&self) -> Partition {
        let mut part = Partition::zero(self.p());
        for a in &self.perms {
            part = part.join(&a.partition());
        }
        part
    }

    /// Irreducible tuples have `⋁_s Π(α_s) = 1_p`.
    pub fn is_irreducible(&self) -> bool {
        self.join_partition().num_blocks() <= 1
    }

    pub fn disjoint_union(&self, other: &Self) -> Self {
        PermTuple {
            perms: self
                .perms
                .iter()
                .zip(&other.perms)
                .map(|(a, b)| a.disjoint_union(b))
                .collect(),
        }
    }

    /// Restrict to a union of blocks of the join partition (first return on
    /// each leg, relabelled in the order of `subset`).
    pub fn restrict(&self, subset: &[usize]) -> Self {
        PermTuple { perms: self.perms.iter().map(|a| a.first_return(subset)).collect() }
    }

    pub fn erase(&self, j: usize) -> Self {
        PermTuple { perms: self.perms.iter().map(|a| a.erase(j)).collect() }
    }

    /// All tuples `β̲ ≤ self`, via the per-leg lattices `S_NC(α_s)`.
    pub fn below(&self) -> Result<Vec<PermTuple>> {
        let legs = self
            .perms
            .iter()
            .map(enumerate_snc)
            .collect::<Result<Vec<_>>>()?;
        Ok(cartesian(&legs))
    }

    /// All of `(S_p)^r`.
    pub fn all(p: usize, r: usize) -> Vec<PermTuple> {
        let sp: Vec<Permutation> = Permutation::all(p).collect();
        let legs = vec![sp; r];
        cartesian(&legs)
    }
}

fn cartesian(legs: &[Vec<Permutation>]) -> Vec<PermTuple> {
    let mut out = vec![Vec::<Permutation>::new()];
    for leg in legs {
        let mut next = Vec::with_capacity(out.len() * leg.len());
        for prefix in &out {
            for a in leg {
                let mut v = prefix.clone();
                v.push(a.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(|perms| PermTuple { perms }).collect()
}

impl fmt::Display for PermTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a) in self.perms.iter().enumerate() {
            if k > 0 {
                write!(f, ";")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PermTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
