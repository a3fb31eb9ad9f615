use fermion_cft::graded::{Factor, GradedOperator, GradedSpace, Parity, WeightShift};
use fermion_cft::linalg::{self, C64};
use rand::seq::SliceRandom;
use rand::Rng;

/// A factor of dimension 1..=max_dim with shuffled, mixed parities.
pub fn factor<R: Rng>(rng: &mut R, max_dim: usize) -> Factor {
    let dim = rng.gen_range(1..=max_dim);
    let mut p: Vec<Parity> = (0..dim).map(|_| Parity::from_bit(rng.gen_range(0..2))).collect();
    p.shuffle(rng);
    Factor::from_parities(p)
}

pub fn space<R: Rng>(rng: &mut R, factors: usize, max_dim: usize) -> GradedSpace {
    GradedSpace::new((0..factors).map(|_| factor(rng, max_dim)).collect())
}

pub fn parity<R: Rng>(rng: &mut R) -> Parity {
    Parity::from_bit(rng.gen_range(0..2))
}

/// A dense random operator of the given parity.
pub fn operator<R: Rng>(rng: &mut R, dom: &GradedSpace, cod: &GradedSpace, p: Parity) -> GradedOperator {
    let mut m = linalg::zeros(cod.dim(), dom.dim());
    for i in 0..cod.dim() {
        for j in 0..dom.dim() {
            if cod.parities()[i].add(dom.parities()[j]) == p {
                m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    GradedOperator {
        matrix: m,
        domain: dom.clone(),
        codomain: cod.clone(),
        parity: Some(p),
        weight_shift: WeightShift::Mixed,
    }
}

/// A dense random operator of random parity.
pub fn homogeneous<R: Rng>(rng: &mut R, dom: &GradedSpace, cod: &GradedSpace) -> GradedOperator {
    let p = parity(rng);
    operator(rng, dom, cod, p)
}
