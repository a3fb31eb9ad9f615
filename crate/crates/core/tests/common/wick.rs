//! Brute-force vertex-operator modes by Wick expansion of normal-ordered
//! products of derivative fields. Shares no sign logic with the library.

use fermion_cft::fock::FockTruncation;
use fermion_cft::linalg::{self, CMat, C64};
use fermion_cft::BasisState;

/// A generator `(k, starred)`; a word is a state in canonical order.
pub type Gen = (i64, bool);

fn order_key(g: Gen) -> (u8, i64) {
    if g.1 {
        (1, g.0)
    } else {
        (0, -g.0)
    }
}

fn creates(g: Gen) -> bool {
    (g.0 < 0) != g.1
}

/// The slot label a generator fills or empties.
fn slot(g: Gen) -> Gen {
    if creates(g) {
        g
    } else {
        (g.0, !g.1)
    }
}

/// Applies one generator to a canonically ordered word.
pub fn act(g: Gen, word: &[Gen]) -> Option<(f64, Vec<Gen>)> {
    let s = slot(g);
    if creates(g) {
        if word.contains(&s) {
            return None;
        }
        let mut w = vec![s];
        w.extend_from_slice(word);
        let mut sign = 1.0;
        // Bubble the new generator into place, one transposition at a time.
        let mut i = 0;
        while i + 1 < w.len() && order_key(w[i]) > order_key(w[i + 1]) {
            w.swap(i, i + 1);
            sign = -sign;
            i += 1;
        }
        Some((sign, w))
    } else {
        let pos = word.iter().position(|&x| x == s)?;
        let mut w = word.to_vec();
        w.remove(pos);
        Some((if pos % 2 == 0 { 1.0 } else { -1.0 }, w))
    }
}

pub fn to_state(word: &[Gen]) -> BasisState {
    let neg = word.iter().filter(|g| !g.1).map(|g| g.0).collect();
    let star = word.iter().filter(|g| g.1).map(|g| g.0).collect();
    BasisState::new(neg, star).expect("oracle produced an invalid state")
}

pub fn from_state(s: &BasisState) -> Vec<Gen> {
    let mut w: Vec<Gen> = s.neg_modes().iter().map(|&k| (k, false)).collect();
    w.extend(s.star_modes().iter().map(|&k| (k, true)));
    w
}

/// `word·Ω` as `±` a canonical word, or zero.
pub fn reduce(word: &[Gen]) -> Option<(f64, Vec<Gen>)> {
    let mut acc = (1.0, Vec::new());
    for &g in word.iter().rev() {
        let (s, w) = act(g, &acc.1)?;
        acc = (acc.0 * s, w);
    }
    Some(acc)
}

fn binom(n: i64, j: i64) -> f64 {
    if j < 0 {
        return 0.0;
    }
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..j {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// The matrix of `ξ_m` for `ξ = word·Ω`, compressed to `trunc`.
pub fn oracle_mode(word: &[Gen], m: i64, trunc: &FockTruncation) -> CMat {
    let dim = trunc.dim();
    let mut out = linalg::zeros(dim, dim);
    let Some((sign0, canon)) = reduce(word) else {
        return out;
    };
    // Each factor is a derivative field: (starred, k) with
    // ψ-type k = -1-n for neg mode n, ψ*-type k = m for star mode m.
    let fields: Vec<(bool, i64)> = canon
        .iter()
        .map(|&(n, st)| if st { (true, n) } else { (false, -1 - n) })
        .collect();
    let r = fields.len() as i64;
    let total = m + 1 - r;
    let reach = 2 * (trunc.cutoff().twice() + 2);
    let orbitals: Vec<i64> = (-reach..=reach).collect();

    // Enumerate mode tuples; each factor contributes one CAR generator.
    let mut tuples: Vec<(f64, Vec<Gen>)> = Vec::new();
    let mut stack: Vec<(usize, i64, f64, Vec<Gen>)> = vec![(0, 0, 1.0, Vec::new())];
    while let Some((i, sum, c, ops)) = stack.pop() {
        if i == fields.len() {
            if sum == total {
                tuples.push((c, ops));
            }
            continue;
        }
        let (starred, k) = fields[i];
        for &j in &orbitals {
            // ψ: X_n = C(k-n-1,k) a(z^{n-k}), j = n-k.  ψ*: X_n = C(k-n-1,k) a(z^{k-n-1})*, j = k-n-1.
            let n = if starred { k - 1 - j } else { j + k };
            let coeff = binom(k - n - 1, k);
            if coeff == 0.0 {
                continue;
            }
            let mut ops2 = ops.clone();
            ops2.push((j, starred));
            stack.push((i + 1, sum + n, c * coeff, ops2));
        }
    }

    for (col, s) in trunc.basis().iter().enumerate() {
        let start = from_state(s);
        for (c, ops) in &tuples {
            // Normal order: creators left, annihilators right, stable, with the
            // sign of the reordering permutation.
            let mut inversions = 0;
            for a in 0..ops.len() {
                for b in a + 1..ops.len() {
                    if !creates(ops[a]) && creates(ops[b]) {
                        inversions += 1;
                    }
                }
            }
            let ordered: Vec<Gen> = ops
                .iter()
                .filter(|g| creates(**g))
                .chain(ops.iter().filter(|g| !creates(**g)))
                .copied()
                .collect();
            let mut state = Some((if inversions % 2 == 0 { 1.0 } else { -1.0 }, start.clone()));
            for &g in ordered.iter().rev() {
                state = state.and_then(|(sg, w)| act(g, &w).map(|(s2, w2)| (sg * s2, w2)));
            }
            if let Some((sg, w)) = state {
                if let Some(row) = trunc.index_of(&to_state(&w)) {
                    out[(row, col)] += C64::new(sign0 * c * sg, 0.0);
                }
            }
        }
    }
    out
}
