//! Pairings of `[±p] = {±1, …, ±p}` and sign-flip involutions.
//!
//! Points of `[±p]` are relabelled onto `0..2p` by `k ↦ k-1` and
//! `-k ↦ p+k-1`, so that products of pairings reuse [`Permutation`].

use std::fmt;

use crate::error::{Error, Result};
use crate::perm::{Partition, Permutation};

/// Default cap on `p` for enumerating all `(2p-1)!!` pairings.
pub const DEFAULT_PAIRING_CAP: usize = 7;

/// Relabel a signed point (`±k`, `k ≥ 1`) to `0..2p`.
pub fn signed_to_index(p: usize, k: i64) -> usize {
    assert!(k != 0 && k.unsigned_abs() as usize <= p, "point {k} outside [±{p}]");
    if k > 0 {
        k as usize - 1
    } else {
        p + (-k) as usize - 1
    }
}

/// Inverse of [`signed_to_index`].
pub fn index_to_signed(p: usize, i: usize) -> i64 {
    if i < p {
        i as i64 + 1
    } else {
        -((i - p) as i64 + 1)
    }
}

/// A fixed-point-free involution of `[±p]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    p: usize,
    partner: Vec<usize>,
}

impl Pairing {
    pub fn from_partner(p: usize, partner: Vec<usize>) -> Result<Self> {
        if partner.len() != 2 * p {
            return Err(Error::Dimension(format!("pairing of [±{p}] needs {} entries", 2 * p)));
        }
        for (i, &j) in partner.iter().enumerate() {
            if j >= 2 * p || j == i || partner[j] != i {
                return Err(Error::Invalid(format!("{partner:?} is not a pairing")));
            }
        }
        Ok(Pairing { p, partner })
    }

    /// From a list of signed pairs such as `[(1, 2), (-2, 3), …]`.
    pub fn from_pairs(p: usize, pairs: &[(i64, i64)]) -> Result<Self> {
        let mut partner = vec![usize::MAX; 2 * p];
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a.unsigned_abs() as usize > p || b.unsigned_abs() as usize > p {
                return Err(Error::Invalid(format!("pair ({a} {b}) outside [±{p}]")));
            }
            let (i, j) = (signed_to_index(p, a), signed_to_index(p, b));
            if partner[i] != usize::MAX || partner[j] != usize::MAX || i == j {
                return Err(Error::Invalid(format!("point repeated in pair ({a} {b})")));
            }
            partner[i] = j;
            partner[j] = i;
        }
        if partner.contains(&usize::MAX) {
            return Err(Error::Invalid("pairs do not cover [±p]".into()));
        }
        Ok(Pairing { p, partner })
    }

    /// Parse `"(1 2)(-2 3)(-3 4)(-1 -4)"`. `p` defaults to the largest `|k|`.
    pub fn parse(s: &str, p: Option<usize>) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            if !rest.starts_with('(') {
                return Err(Error::Parse(format!("expected '(' in {s:?}")));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed pair in {s:?}")))?;
            let toks: Vec<i64> = rest[1..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad point {t:?}"))))
                .collect::<Result<_>>()?;
            if toks.len() != 2 {
                return Err(Error::Parse(format!("blocks of a pairing have two points in {s:?}")));
            }
            pairs.push((toks[0], toks[1]));
            rest = rest[close + 1..].trim_start();
        }
        let max = pairs
            .iter()
            .flat_map(|&(a, b)| [a.unsigned_abs(), b.unsigned_abs()])
            .max()
            .unwrap_or(0) as usize;
        Self::from_pairs(p.unwrap_or(max), &pairs)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Partner of a relabelled point.
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    /// The pairing as an involution of `0..2p`.
    pub fn as_perm(&self) -> Permutation {
        Permutation::from_images(self.partner.clone()).expect("pairing is a bijection")
    }

    pub fn from_perm(p: usize, perm: &Permutation) -> Result<Self> {
        Self::from_partner(p, perm.images().to_vec())
    }

    /// The blocks as a partition of `0..2p`.
    pub fn partition(&self) -> Partition {
        self.as_perm().partition()
    }

    /// Signed pairs, each listed once, ordered by relabelled index.
    pub fn pairs(&self) -> Vec<(i64, i64)> {
        (0..2 * self.p)
            .filter(|&i| i < self.partner[i])
            .map(|i| (index_to_signed(self.p, i), index_to_signed(self.p, self.partner[i])))
            .collect()
    }

    /// Whether every positive point is paired with a negative one.
    pub fn is_delta_type(&self) -> bool {
        (0..self.p).all(|i| self.partner[i] >= self.p)
    }

    /// `ε π ε` for a sign-flip involution `ε`.
    pub fn conjugate_by(&self, eps: &SignedInvolution) -> Pairing {
        let e = eps.as_perm();
        Pairing::from_perm(self.p, &self.as_perm().conjugate_by(&e)).expect("conjugate of a pairing")
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in self.pairs() {
            write!(f, "({a} {b})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `ε(k) = signs[|k|] · k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SignedInvolution {
    signs: Vec<i8>,
}

impl SignedInvolution {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Invalid(format!("signs {signs:?} must be ±1")));
        }
        Ok(SignedInvolution { signs })
    }

    pub fn all_plus(p: usize) -> Self {
        SignedInvolution { signs: vec![1; p] }
    }

    pub fn p(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// The involution as a permutation of `0..2p` (flipped points swap `k ↔ -k`).
    pub fn as_perm(&self) -> Permutation {
        let p = self.p();
        let mut img: Vec<usize> = (0..2 * p).collect();
        for (k, &s) in self.signs.iter().enumerate() {
            if s < 0 {
                img.swap(k, p + k);
            }
        }
        Permutation::from_images(img).expect("sign flip is a bijection")
    }
}

/// `δ = (1 -1)(2 -2)⋯(p -p)`.
pub fn delta(p: usize) -> Pairing {
    let partner = (0..2 * p).map(|i| if i < p { i + p } else { i - p }).collect();
    Pairing { p, partner }
}

/// A permutation of `[p]` acting on `[±p]` by fixing the negative points.
pub fn embed_positive(sigma: &Permutation) -> Permutation {
    let p = sigma.p();
    let mut img: Vec<usize> = (0..2 * p).collect();
    img[..p].copy_from_slice(sigma.images());
    Permutation::from_images(img).expect("embedding is a bijection")
}

/// All pairings of `[±p]`, smallest unpaired point first. Capped at `p ≤ 7`.
pub fn enumerate_pairings(p: usize) -> Result<Vec<Pairing>> {
    enumerate_pairings_capped(p, DEFAULT_PAIRING_CAP)
}

pub fn enumerate_pairings_capped(p: usize, cap: usize) -> Result<Vec<Pairing>> {
    if p > cap {
        return Err(Error::Resource(format!("(2p-1)!! pairings for p = {p} exceeds cap p ≤ {cap}")));
    }
    fn rec(partner: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(i) = partner.iter().position(|&v| v == usize::MAX) else {
            out.push(partner.clone());
            return;
        };
        for j in i + 1..partner.len() {
            if partner[j] == usize::MAX {
                partner[i] = j;
                partner[j] = i;
                rec(partner, out);
                partner[i] = usize::MAX;
                partner[j] = usize::MAX;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; 2 * p], &mut out);
    Ok(out.into_iter().map(|partner| Pairing { p, partner }).collect())
}

/// `#(π ∨ ρ)`, computed as half the number of cycles of `πρ`.
pub fn join_block_count(pi: &Pairing, rho: &Pairing) -> Result<usize> {
    if pi.p != rho.p {
        return Err(Error::Dimension("pairings of different order".into()));
    }
    Ok(pi.as_perm().compose(&rho.as_perm()).num_cycles() / 2)
}

/// The blocks of `π ∨ ρ` as a partition of the relabelled points.
pub fn join_partition(pi: &Pairing, rho: &Pairing) -> Partition {
    pi.partition().join(&rho.partition())
}

/// `Möb(π ∨ ρ) = ∏_i (-1)^{|c_i|} Cat_{|c_i|}` over one cycle from each of
/// the pairs `c_i, c_i'` of cycles of `πρ`.
pub fn pairing_mobius(pi: &Pairing, rho: &Pairing) -> i64 {
    // each block of size 2m contributes a pair of m-cycles; |c| = m - 1
    join_partition(pi, rho)
        .blocks()
        .iter()
        .map(|b| {
            let n = b.len() / 2 - 1;
            let cat = crate::perm::catalan(n).expect("small order") as i64;
            if n % 2 == 0 {
                cat
            } else {
                -cat
            }
        })
        .product()
}

/// `αδα⁻¹ = (α(1) -1)⋯(α(p) -p)`.
pub fn pairing_from_perm(sigma: &Permutation) -> Pairing {
    let p = sigma.p();
    let mut partner = vec![0; 2 * p];
    for k in 0..p {
        let a = sigma.apply(k);
        partner[a] = p + k;
        partner[p + k] = a;
    }
    Pairing { p, partner }
}

/// Inverse of [`pairing_from_perm`]: `πδ` restricted to `[p]`.
pub fn perm_from_pairing(pi: &Pairing) -> Result<Permutation> {
    if !pi.is_delta_type() {
        return Err(Error::Invalid(format!("{pi} pairs two points of the same sign")));
    }
    let p = pi.p;
    Permutation::from_images((0..p).map(|k| pi.partner[p + k]).collect())
}

/// Write `π = ε σδσ⁻¹ ε`.
///
/// Each block of `π ∨ δ` admits exactly two sign patterns making `επε`
/// pair positives with negatives; we take the one flipping fewer points,
/// and on a tie the one leaving the block's smallest point unflipped.
pub fn factorize(pi: &Pairing) -> (Permutation, SignedInvolution) {
    let p = pi.p;
    let mut sign = vec![0i8; p];
    for start in 0..p {
        if sign[start] != 0 {
            continue;
        }
        // propagate s_a s_b = -sgn(a) sgn(b) along the block containing `start`
        let mut comp = vec![start];
        sign[start] = 1;
        let mut stack = vec![start];
        while let Some(k) = stack.pop() {
            for idx in [k, p + k] {
                let j = pi.partner[idx];
                let (ka, sa) = (idx % p, if idx < p { 1i8 } else { -1 });
                let (kb, sb) = (j % p, if j < p { 1i8 } else { -1 });
                let want = -sa * sb * sign[ka];
                if sign[kb] == 0 {
                    sign[kb] = want;
                    comp.push(kb);
                    stack.push(kb);
                } else {
                    debug_assert_eq!(sign[kb], want, "inconsistent sign constraints");
                }
            }
        }
        let flips = comp.iter().filter(|&&k| sign[k] < 0).count();
        if 2 * flips > comp.len() {
            for &k in &comp {
                sign[k] = -sign[k];
            }
        }
    }
    let eps = SignedInvolution { signs: sign };
    let conj = pi.conjugate_by(&eps);
    let sigma = perm_from_pairing(&conj).expect("conjugated pairing is of δ type");
    (sigma, eps)
}

/// `ε σδσ⁻¹ ε`.
pub fn recompose(sigma: &Permutation, eps: &SignedInvolution) -> Pairing {
    pairing_from_perm(sigma).conjugate_by(eps)
}

/// `ρδ ≤ πδ` in the geodesic order of `S_{±p}`.
pub fn pairing_geodesic(rho: &Pairing, pi: &Pairing) -> Result<bool> {
    if rho.p != pi.p {
        return Err(Error::Dimension("pairings of different order".into()));
    }
    let d = delta(pi.p).as_perm();
    let rd = rho.as_perm().compose(&d);
    let pd = pi.as_perm().compose(&d);
    Ok(rd.length() + rd.inverse().compose(&pd).length() == pd.length())
}

/// Replace each cycle `c_k` of `σ` by `c_k^{λ_k}`, with `λ_k` the value of
/// `f` on that cycle.
pub fn sigma_f(sigma: &Permutation, f: &[i8]) -> Result<Permutation> {
    if f.len() != sigma.p() {
        return Err(Error::Dimension("sign function length differs from p".into()));
    }
    let mut cycles = Vec::new();
    for c in sigma.cycles() {
        let l = f[c[0]];
        if c.iter().any(|&a| f[a] != l) {
            return Err(Error::Invalid(format!("f is not constant on the cycles of {sigma}")));
        }
        if l < 0 {
            let mut r = c.clone();
            r[1..].reverse();
            cycles.push(r);
        } else {
            cycles.push(c);
        }
    }
    Permutation::from_cycles(sigma.p(), &cycles)
}
