//! Seeded random generators for elements, projections, effects and pairs.
//!
//! Every trial draws from its own ChaCha stream derived from `(seed, index)`,
//! so results never depend on the order trials are run in.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::effect::Effect;
use crate::lattice::Projection;
use crate::linalg::{Matrix, SymmetricElement};

/// Independent stream for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-distributed orthogonal matrix: Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            for _ in 0..2 {
                for q in &cols {
                    let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-6 {
                break;
            }
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
        if cols.len() == n {
            return Matrix::from_columns(n, &cols);
        }
    }
}

/// `Q diag(values) Qᵀ`.
pub fn with_spectrum(q: &Matrix, values: &[f64]) -> SymmetricElement {
    let n = q.rows();
    Matrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| q.get(i, k) * values[k] * q.get(j, k)).sum()
    })
    .symmetrize()
}

/// Projection onto the first `rank` columns of `q`.
pub fn leading_columns(q: &Matrix, rank: usize) -> Projection {
    let cols: Vec<Vec<f64>> = (0..rank).map(|k| q.column(k)).collect();
    Projection::from_orthonormal_columns(&Matrix::from_columns(q.rows(), &cols))
}

pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Projection {
    leading_columns(&random_orthogonal(rng, n), rank)
}

/// Rank uniform in `1..n` (exclusive), or `1` when `n = 1`.
pub fn random_proper_rank<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    if n < 2 {
        1
    } else {
        rng.random_range(1..n)
    }
}

pub fn random_atom<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Projection {
    random_projection(rng, n, 1)
}

/// Eigenvalues uniform in `[0, 1]`; with probability 1/4 each one is then
/// snapped to the nearer of `0`, `1` with probability 1/2.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    if rng.random_bool(0.25) {
        for x in &mut u {
            if rng.random_bool(0.5) {
                *x = x.round();
            }
        }
    }
    u
}

pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Effect {
    let q = random_orthogonal(rng, n);
    Effect::trusted(with_spectrum(&q, &random_spectrum(rng, n)))
}

/// Probability that a generated pair shares one eigenbasis and so commutes.
pub const COMMUTING_PROBABILITY: f64 = 0.125;

/// `p` of proper rank and an effect `e`; occasionally `e` is built on the
/// rotation defining `p`, which makes the pair commute.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Projection, Effect) {
    let rank = random_proper_rank(rng, n);
    pair_with_rank(rng, n, rank)
}

fn pair_with_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> (Projection, Effect) {
    let qp = random_orthogonal(rng, n);
    let p = leading_columns(&qp, rank);
    let qe = if rng.random_bool(COMMUTING_PROBABILITY) {
        qp
    } else {
        random_orthogonal(rng, n)
    };
    let e = Effect::trusted(with_spectrum(&qe, &random_spectrum(rng, n)));
    (p, e)
}

/// An atom `p` with an effect, commuting occasionally as in [`random_pair`].
pub fn random_atom_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Projection, Effect) {
    pair_with_rank(rng, n, 1)
}

/// Two projections of proper rank; they commute occasionally.
pub fn random_projection_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Projection, Projection) {
    let qp = random_orthogonal(rng, n);
    let p = leading_columns(&qp, random_proper_rank(rng, n));
    let qe = if rng.random_bool(COMMUTING_PROBABILITY) {
        qp
    } else {
        random_orthogonal(rng, n)
    };
    let rank = random_proper_rank(rng, n);
    // shuffle which shared columns the second one takes
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        idx.swap(i, rng.random_range(0..=i));
    }
    let cols: Vec<Vec<f64>> = idx[..rank].iter().map(|&k| qe.column(k)).collect();
    (p, Projection::from_orthonormal_columns(&Matrix::from_columns(n, &cols)))
}

/// A pair that splits along a projection `q` commuting with both: random
/// blocks of sizes `m` and `n - m`, rotated by a common orthogonal matrix.
/// Needs `n ≥ 2`.
pub fn random_reducible_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Projection, Effect, Projection) {
    assert!(n >= 2, "a reducible pair needs n >= 2");
    let m = rng.random_range(1..n);
    let u = random_orthogonal(rng, n);
    let mut p_block = Matrix::zeros(n, n);
    let mut e_block = Matrix::zeros(n, n);
    for (offset, size) in [(0, m), (m, n - m)] {
        let rank = rng.random_range(0..=size);
        let (p, e) = pair_with_rank(rng, size, rank.max(1));
        let p = if rank == 0 { Projection::zero(size) } else { p };
        for i in 0..size {
            for j in 0..size {
                p_block.set(offset + i, offset + j, p.element().get(i, j));
                e_block.set(offset + i, offset + j, e.element().get(i, j));
            }
        }
    }
    let rotate = |m: &Matrix| u.matmul(m).matmul(&u.transpose()).symmetrize();
    let p_rank = (0..n).map(|i| p_block.get(i, i)).sum::<f64>().round() as usize;
    let p = Projection::from_parts(rotate(&p_block), p_rank);
    let e = Effect::trusted(rotate(&e_block));
    (p, e, leading_columns(&u, m))
}

/// Symmetric matrix with standard Gaussian entries.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymmetricElement {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    (&g + &g.transpose()).scale(0.5).symmetrize()
}

/// Positive element of random rank `0..=n`, eigenvalues in `(0, 2]`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymmetricElement {
    let rank = rng.random_range(0..=n);
    let q = random_orthogonal(rng, n);
    let values: Vec<f64> = (0..n)
        .map(|k| if k < rank { 0.1 + 1.9 * rng.random::<f64>() } else { 0.0 })
        .collect();
    with_spectrum(&q, &values)
}

/// Two elements diagonal in one random basis, each with some zero
/// eigenvalues and some of either sign.
pub fn random_commuting_elements<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (SymmetricElement, SymmetricElement) {
    let q = random_orthogonal(rng, n);
    let draw = |rng: &mut R| -> Vec<f64> {
        (0..n)
            .map(|_| {
                if rng.random_bool(0.35) {
                    0.0
                } else {
                    rng.random_range(-2.0..2.0)
                }
            })
            .collect()
    };
    let a = draw(rng);
    let b = draw(rng);
    (with_spectrum(&q, &a), with_spectrum(&q, &b))
}

/// A projection commuting with `hub`: independent random projections inside
/// the range of `hub` and of its complement, added together.
pub fn random_projection_commuting_with<R: Rng + ?Sized>(rng: &mut R, hub: &Projection, q: &Matrix) -> Projection {
    // `q` holds the range of `hub` in its first `hub.rank()` columns
    let n = hub.dim();
    let k = hub.rank();
    let mut cols = Vec::new();
    for (start, size) in [(0, k), (k, n - k)] {
        if size == 0 {
            continue;
        }
        let take = rng.random_range(0..=size);
        let r = random_orthogonal(rng, size);
        for c in 0..take {
            let v: Vec<f64> = (0..n)
                .map(|i| (0..size).map(|l| q.get(i, start + l) * r.get(l, c)).sum())
                .collect();
            cols.push(v);
        }
    }
    if cols.is_empty() {
        return Projection::zero(n);
    }
    Projection::from_orthonormal_columns(&Matrix::from_columns(n, &cols))
}

/// Three projections of which at least two pairs commute: one of the three
/// (chosen at random) is a coordinate-type projection the other two commute
/// with.
pub fn random_distributive_triple<R: Rng + ?Sized>(rng: &mut R, n: usize) -> [Projection; 3] {
    let q = random_orthogonal(rng, n);
    let hub = leading_columns(&q, rng.random_range(0..=n));
    let a = random_projection_commuting_with(rng, &hub, &q);
    let b = random_projection_commuting_with(rng, &hub, &q);
    match rng.random_range(0..3) {
        0 => [hub, a, b],
        1 => [a, hub, b],
        _ => [a, b, hub],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::commutes;
    use crate::tolerance::ToleranceConfig;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = trial_rng(7, 3).random();
        let b: f64 = trial_rng(7, 3).random();
        let c: f64 = trial_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = trial_rng(1, 0);
        for n in 1..=8 {
            let q = random_orthogonal(&mut rng, n);
            let qtq = q.transpose().matmul(&q);
            assert!((&qtq - &Matrix::identity(n)).frobenius_norm() < 1e-13);
        }
    }

    #[test]
    fn generated_objects_are_valid() {
        let t = ToleranceConfig::default();
        let mut rng = trial_rng(2, 0);
        for n in 2..=6 {
            let (p, e) = random_pair(&mut rng, n);
            assert!(Projection::new(p.element().clone(), &t).unwrap().rank() == p.rank());
            Effect::new(e.element().clone(), &t).unwrap();
            let (p, e, q) = random_reducible_pair(&mut rng, n);
            Projection::new(p.element().clone(), &t).unwrap();
            assert!(commutes(q.element(), p.element(), &t).unwrap());
            assert!(commutes(q.element(), e.element(), &t).unwrap());
            let [a, b, c] = random_distributive_triple(&mut rng, n);
            let pairs = [
                commutes(a.element(), b.element(), &t).unwrap(),
                commutes(a.element(), c.element(), &t).unwrap(),
                commutes(b.element(), c.element(), &t).unwrap(),
            ];
            assert!(pairs.iter().filter(|&&x| x).count() >= 2);
        }
    }
}
