//! The four model families as local two-site bricks: generic random
//! unitaries, projector-embedded scar models, and the pair-flip model
//! (fragmented for d >= 3, U(1)-symmetric for d = 2).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_core::RngCore;

use crate::drive::{Brick, DriveSchedule};
use crate::haar::sample_haar_unitary;
use crate::linalg::{hermitian_eigen, hermitian_matrix_function, CMat};
use crate::rng::{uniform_f64, uniform_phase};
use crate::state::{LocalGate, Parity, StateVector};
use crate::{domain_err, Error, Result};
// f64 math comes from num-traits under no_std; with std linked the
// inherent methods win and this import is unused.
#[allow(unused_imports)]
use num_traits::Float;

/// Dimension cap for the dense scar-kernel computation.
pub const SCAR_KERNEL_DENSE_CAP: usize = 4096;

/// Null-space threshold for the scar-kernel computation, relative to the
/// largest eigenvalue of the summed bond projectors.
pub const SCAR_NULLSPACE_RTOL: f64 = 1e-9;

/// Two-site projector used for scar embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    local_dim: usize,
    matrix: CMat,
}

impl Projector {
    pub fn new(local_dim: usize, matrix: CMat) -> Result<Self> {
        let d2 = local_dim * local_dim;
        if matrix.n_rows() != d2 || matrix.n_cols() != d2 {
            return domain_err("projector must be d^2 x d^2");
        }
        let idem = matrix.mul(&matrix).max_abs_diff(&matrix);
        if idem > 1e-12 || matrix.hermiticity_defect() > 1e-12 {
            return Err(Error::Numerical(alloc::format!(
                "not an orthogonal projector (idempotency defect {idem:e})"
            )));
        }
        Ok(Projector { local_dim, matrix })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        // Idempotent Hermitian: rank = trace.
        self.matrix.trace().re.round() as usize
    }
}

/// The scar projector variants. `P1` exists for any d >= 2; the other
/// three embed qubit-level structure (levels |0>, |1>) into d = 3 qutrits,
/// leaving level |2> generic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectorKind {
    /// `I - |00><00|`: one scar.
    P1,
    /// `I - |00><00| - |11><11|`: two scars.
    P2,
    /// Also subtracts `|01><01|` and `|10><10|`: `2^N` scars.
    Pexp,
    /// Subtracts `|00>`, `|11>` and the singlet `(|01> - |10>)/sqrt(2)`
    /// (the normalized form of `|+-> - |-+>`): `N + 1` scars.
    Plin,
}

impl ProjectorKind {
    pub fn label(self) -> &'static str {
        match self {
            ProjectorKind::P1 => "p1",
            ProjectorKind::P2 => "p2",
            ProjectorKind::Pexp => "pexp",
            ProjectorKind::Plin => "plin",
        }
    }
}

/// Model family of a circuit instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Generic,
    Scar(ProjectorKind),
    PairFlip,
}

/// The four local bricks plus the lattice geometry: everything the drive
/// needs to propagate a state.
#[derive(Debug, Clone)]
pub struct CircuitModel {
    n_sites: usize,
    local_dim: usize,
    family: ModelFamily,
    even_a: LocalGate,
    odd_a: LocalGate,
    even_b: LocalGate,
    odd_b: LocalGate,
}

impl CircuitModel {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        crate::state::pow_usize(self.local_dim, self.n_sites)
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn bricks(&self) -> [&LocalGate; 4] {
        [&self.even_a, &self.odd_a, &self.even_b, &self.odd_b]
    }

    fn layers_for(&self, brick: Brick) -> (&LocalGate, &LocalGate) {
        match brick {
            Brick::A => (&self.even_a, &self.odd_a),
            Brick::B => (&self.even_b, &self.odd_b),
        }
    }

    /// One time-step `U = U_odd U_even` of the selected propagator.
    pub fn step(&self, state: &mut StateVector, brick: Brick) -> Result<()> {
        let (even, odd) = self.layers_for(brick);
        state.apply_layer(even, Parity::Even)?;
        state.apply_layer(odd, Parity::Odd)?;
        Ok(())
    }

    /// Same step applied to a raw amplitude slice (used when evolving the
    /// columns of an operator).
    pub fn step_slice(&self, amps: &mut [Complex64], brick: Brick) -> Result<()> {
        if amps.len() != self.dim() {
            return domain_err("amplitude slice has wrong dimension");
        }
        let (even, odd) = self.layers_for(brick);
        for (gate, parity) in [(even, Parity::Even), (odd, Parity::Odd)] {
            for left in crate::state::layer_bonds(self.n_sites, parity) {
                crate::state::apply_two_site_gate_slice(
                    amps,
                    self.n_sites,
                    self.local_dim,
                    gate.matrix(),
                    left,
                );
            }
        }
        Ok(())
    }

    /// Drive `initial` through `schedule`, calling `visit(t, state)` for
    /// `t = 0 ..= horizon` (so the temporal ensemble of size `T` is the
    /// prefix `t < T`).
    pub fn evolve_visit(
        &self,
        initial: &StateVector,
        schedule: &DriveSchedule,
        mut visit: impl FnMut(usize, &StateVector) -> Result<()>,
    ) -> Result<()> {
        let mut state = initial.clone();
        visit(0, &state)?;
        for t in 1..=schedule.horizon() {
            self.step(&mut state, schedule.brick_for_step(t))?;
            visit(t, &state)?;
        }
        Ok(())
    }
}

/// Hermitian matrix with real and imaginary parts of every entry drawn
/// uniformly from `[0, 1)`, then symmetrized as `(G + G^dag)/2` (a raw such
/// draw is not Hermitian; symmetrization is the minimal faithful reading).
pub fn random_hermitian<R: RngCore>(dim: usize, rng: &mut R) -> CMat {
    assert!(dim >= 1);
    let g = CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(uniform_f64(rng), uniform_f64(rng))
    });
    g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// `exp(i * sign * H)` via eigendecomposition.
pub fn unitary_from_generator(hermitian: &CMat, sign: f64) -> Result<LocalGate> {
    let u = hermitian_matrix_function(hermitian, 1e-10, |lam| {
        Complex64::new(0.0, sign * lam).exp()
    })?;
    let d = int_sqrt(u.n_rows());
    LocalGate::new(d, u)
}

/// `exp(i * sign * H)` for matrices that are not two-site gates.
pub fn unitary_matrix_from_generator(hermitian: &CMat, sign: f64) -> Result<CMat> {
    hermitian_matrix_function(hermitian, 1e-10, |lam| {
        Complex64::new(0.0, sign * lam).exp()
    })
}

fn int_sqrt(n: usize) -> usize {
    let r = (n as f64).sqrt().round() as usize;
    assert_eq!(r * r, n, "matrix dimension is not a perfect square");
    r
}

/// Build one of the scar projectors.
pub fn scar_projector(kind: ProjectorKind, local_dim: usize) -> Result<Projector> {
    let d = local_dim;
    if d < 2 {
        return domain_err("scar projectors need d >= 2");
    }
    if kind != ProjectorKind::P1 && d < 3 {
        return domain_err("qubit-embedded projectors are defined on d >= 3");
    }
    let d2 = d * d;
    let pair = |a: usize, b: usize| a * d + b;
    let mut m = CMat::identity(d2);
    let mut subtract_basis = |idx: usize| {
        m[(idx, idx)] -= Complex64::new(1.0, 0.0);
    };
    match kind {
        ProjectorKind::P1 => {
            subtract_basis(pair(0, 0));
        }
        ProjectorKind::P2 => {
            subtract_basis(pair(0, 0));
            subtract_basis(pair(1, 1));
        }
        ProjectorKind::Pexp => {
            subtract_basis(pair(0, 0));
            subtract_basis(pair(1, 1));
            subtract_basis(pair(0, 1));
            subtract_basis(pair(1, 0));
        }
        ProjectorKind::Plin => {
            subtract_basis(pair(0, 0));
            subtract_basis(pair(1, 1));
            // |Phi_-> = |+-> - |-+> = -2|01> + 2|10>, normalized to
            // (|10> - |01>)/sqrt(2) before projecting.
            let inv = 1.0 / 2.0f64.sqrt();
            let mut phi = vec![Complex64::new(0.0, 0.0); d2];
            phi[pair(1, 0)] = Complex64::new(inv, 0.0);
            phi[pair(0, 1)] = Complex64::new(-inv, 0.0);
            for r in 0..d2 {
                for c in 0..d2 {
                    m[(r, c)] -= phi[r] * phi[c].conj();
                }
            }
        }
    }
    Projector::new(d, m)
}

/// `exp(i P H P)`: a two-site gate whose fixed points include every state
/// annihilated by `P`.
pub fn scar_embedded_gate(hermitian: &CMat, projector: &Projector) -> Result<LocalGate> {
    if hermitian.n_rows() != projector.matrix.n_rows() {
        return domain_err("generator and projector dimensions differ");
    }
    let php = projector.matrix.mul(hermitian).mul(&projector.matrix);
    unitary_from_generator(&php, 1.0)
}

/// Sum of the bond-embedded projectors `sum_n P_{n,n+1}` as a dense
/// `d^N x d^N` matrix.
fn bond_projector_sum(projector: &Projector, n_sites: usize) -> Result<CMat> {
    let d = projector.local_dim;
    let dim = crate::state::pow_usize(d, n_sites);
    if dim > SCAR_KERNEL_DENSE_CAP {
        return Err(Error::CapExceeded(alloc::format!(
            "scar kernel needs dense D = {dim} > {SCAR_KERNEL_DENSE_CAP}"
        )));
    }
    let d2 = d * d;
    let mut sum = CMat::zeros(dim, dim);
    for left in 0..n_sites - 1 {
        let step = crate::state::pow_usize(d, n_sites - 2 - left);
        let block = step * d2;
        let n_prefix = crate::state::pow_usize(d, left);
        for prefix in 0..n_prefix {
            for suffix in 0..step {
                let base = prefix * block + suffix;
                for row_pair in 0..d2 {
                    for col_pair in 0..d2 {
                        let v = projector.matrix[(row_pair, col_pair)];
                        if v != Complex64::new(0.0, 0.0) {
                            sum[(base + row_pair * step, base + col_pair * step)] += v;
                        }
                    }
                }
            }
        }
    }
    Ok(sum)
}

/// Number of invariant scar directions: the dimension of the simultaneous
/// kernel of all bond-embedded projectors, computed as the null-space
/// dimension of their sum. Eigenvalues below
/// `SCAR_NULLSPACE_RTOL * lambda_max` count as zero.
pub fn scar_dimension(projector: &Projector, n_sites: usize) -> Result<usize> {
    Ok(scar_kernel_basis(projector, n_sites)?.len())
}

/// Orthonormal basis (as full-space vectors) of the simultaneous kernel of
/// all bond-embedded projectors, i.e. the scar states themselves.
pub fn scar_kernel_basis(projector: &Projector, n_sites: usize) -> Result<Vec<Vec<Complex64>>> {
    if n_sites < 2 {
        return domain_err("scar kernel needs at least two sites");
    }
    let sum = bond_projector_sum(projector, n_sites)?;
    let eig = hermitian_eigen(&sum, 1e-10)?;
    let lambda_max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    let dim = sum.n_rows();
    let mut basis = Vec::new();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < SCAR_NULLSPACE_RTOL * lambda_max {
            basis.push((0..dim).map(|r| eig.eigenvectors[(r, j)]).collect());
        }
    }
    Ok(basis)
}

/// Pair-flip two-site gate: a Haar-random `U(d)` block on the equal-pair
/// span `{|aa>}` and an independent uniform phase on every `|ab>`, a != b.
pub fn pair_flip_gate<R: RngCore>(local_dim: usize, rng: &mut R) -> Result<LocalGate> {
    let d = local_dim;
    if d < 2 {
        return domain_err("pair-flip gates need d >= 2");
    }
    let block = sample_haar_unitary(d, rng);
    let d2 = d * d;
    let mut m = CMat::zeros(d2, d2);
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue;
            }
            let idx = a * d + b;
            let phi = uniform_phase(rng);
            m[(idx, idx)] = Complex64::new(0.0, phi).exp();
        }
    }
    for a in 0..d {
        for b in 0..d {
            m[(a * d + a, b * d + b)] = block[(a, b)];
        }
    }
    LocalGate::new(d, m)
}

/// Draw the four bricks of the requested family, each with fresh
/// randomness. Identical seeds give bit-identical models.
pub fn build_circuit<R: RngCore>(
    family: ModelFamily,
    n_sites: usize,
    local_dim: usize,
    rng: &mut R,
) -> Result<CircuitModel> {
    if n_sites < 2 {
        return domain_err("a brickwork circuit needs at least two sites");
    }
    if local_dim < 2 {
        return domain_err("local dimension must be at least 2");
    }
    let d2 = local_dim * local_dim;
    let draw = |rng: &mut R| -> Result<LocalGate> {
        match family {
            ModelFamily::Generic => {
                let h = random_hermitian(d2, rng);
                unitary_from_generator(&h, -1.0)
            }
            ModelFamily::Scar(kind) => {
                let p = scar_projector(kind, local_dim)?;
                let h = random_hermitian(d2, rng);
                scar_embedded_gate(&h, &p)
            }
            ModelFamily::PairFlip => pair_flip_gate(local_dim, rng),
        }
    };
    Ok(CircuitModel {
        n_sites,
        local_dim,
        family,
        even_a: draw(rng)?,
        odd_a: draw(rng)?,
        even_b: draw(rng)?,
        odd_b: draw(rng)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn random_hermitian_exact_symmetry() {
        let mut rng = seeded_rng(1);
        let h = random_hermitian(4, &mut rng);
        assert_eq!(h.hermiticity_defect(), 0.0);
        for i in 0..4 {
            assert_eq!(h[(i, i)].im, 0.0);
        }
    }

    #[test]
    fn random_hermitian_entry_mean() {
        let mut rng = seeded_rng(2);
        let samples = 100_000;
        let mut sum = 0.0;
        for _ in 0..samples {
            let h = random_hermitian(2, &mut rng);
            sum += h[(0, 1)].re;
        }
        let mean = sum / samples as f64;
        // (u + u')/2 with u, u' ~ U[0,1): mean 1/2, var 1/24.
        let se = (1.0 / 24.0 / samples as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn exponential_trivial_cases() {
        let zero = CMat::zeros(4, 4);
        let u = unitary_from_generator(&zero, 1.0).unwrap();
        assert_eq!(u.matrix().max_abs_diff(&CMat::identity(4)), 0.0);

        // exp(-i pi I) = -I.
        let pi_id = CMat::identity(4).scale(Complex64::new(core::f64::consts::PI, 0.0));
        let u = unitary_from_generator(&pi_id, -1.0).unwrap();
        let minus_i = CMat::identity(4).scale(Complex64::new(-1.0, 0.0));
        assert!(u.matrix().max_abs_diff(&minus_i) < 1e-14);
    }

    #[test]
    fn exponential_matches_taylor_series() {
        let mut rng = seeded_rng(3);
        let h = random_hermitian(4, &mut rng);
        let u = unitary_from_generator(&h, 1.0).unwrap();
        // 30-term Taylor series of exp(iH).
        let mut term = CMat::identity(4);
        let mut series = CMat::identity(4);
        for n in 1..=30 {
            term = term.mul(&h).scale(Complex64::new(0.0, 1.0 / n as f64));
            series = series.add(&term);
        }
        assert!(u.matrix().max_abs_diff(&series) < 1e-10);
    }

    #[test]
    fn projector_ranks_and_kernels() {
        let p1 = scar_projector(ProjectorKind::P1, 2).unwrap();
        assert_eq!(p1.rank(), 3);
        let e00: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let img = p1.matrix().mul_vec(&e00);
        assert!(img.iter().all(|z| z.norm() < 1e-15));

        let pexp = scar_projector(ProjectorKind::Pexp, 3).unwrap();
        assert_eq!(pexp.rank(), 5);

        let plin = scar_projector(ProjectorKind::Plin, 3).unwrap();
        assert_eq!(plin.rank(), 6);
        let d = 3;
        let mut singlet = vec![Complex64::new(0.0, 0.0); 9];
        let inv = 1.0 / 2.0f64.sqrt();
        singlet[0 * d + 1] = Complex64::new(inv, 0.0);
        singlet[1 * d + 0] = Complex64::new(-inv, 0.0);
        let img = plin.matrix().mul_vec(&singlet);
        assert!(img.iter().all(|z| z.norm() < 1e-14), "singlet not annihilated");
        for idx in [0usize, 4] {
            let mut e = vec![Complex64::new(0.0, 0.0); 9];
            e[idx] = Complex64::new(1.0, 0.0);
            let img = plin.matrix().mul_vec(&e);
            assert!(img.iter().all(|z| z.norm() < 1e-14), "basis {idx} not annihilated");
        }
    }

    #[test]
    fn scar_gate_fixes_kernel_states() {
        let mut rng = seeded_rng(4);
        let p = scar_projector(ProjectorKind::P1, 2).unwrap();
        let h = random_hermitian(4, &mut rng);
        let u = scar_embedded_gate(&h, &p).unwrap();
        let e00: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let img = u.matrix().mul_vec(&e00);
        assert!((img[0] - 1.0).norm() < 1e-12);
        for z in &img[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn scar_gate_degenerate_projectors() {
        let mut rng = seeded_rng(5);
        let h = random_hermitian(4, &mut rng);
        // P = 0 -> identity gate.
        let zero = Projector::new(2, CMat::zeros(4, 4)).unwrap();
        let u = scar_embedded_gate(&h, &zero).unwrap();
        assert!(u.matrix().max_abs_diff(&CMat::identity(4)) < 1e-14);
        // P = I -> plain exp(+iH).
        let id = Projector::new(2, CMat::identity(4)).unwrap();
        let u = scar_embedded_gate(&h, &id).unwrap();
        let direct = unitary_from_generator(&h, 1.0).unwrap();
        assert!(u.matrix().max_abs_diff(direct.matrix()) < 1e-12);
    }

    #[test]
    fn scar_dimension_counts() {
        let p1_qubit = scar_projector(ProjectorKind::P1, 2).unwrap();
        assert_eq!(scar_dimension(&p1_qubit, 4).unwrap(), 1);

        let p1 = scar_projector(ProjectorKind::P1, 3).unwrap();
        assert_eq!(scar_dimension(&p1, 4).unwrap(), 1);
        let p2 = scar_projector(ProjectorKind::P2, 3).unwrap();
        assert_eq!(scar_dimension(&p2, 4).unwrap(), 2);
        let pexp = scar_projector(ProjectorKind::Pexp, 3).unwrap();
        assert_eq!(scar_dimension(&pexp, 4).unwrap(), 16);
        let plin = scar_projector(ProjectorKind::Plin, 3).unwrap();
        assert_eq!(scar_dimension(&plin, 4).unwrap(), 5);
    }

    #[test]
    fn pair_flip_gate_structure() {
        let mut rng = seeded_rng(6);
        for d in [2usize, 3] {
            let g = pair_flip_gate(d, &mut rng).unwrap();
            let m = g.matrix();
            assert!(m.unitarity_defect() < 1e-12);
            // |01> maps to a pure phase on itself.
            let idx = 0 * d + 1;
            for r in 0..d * d {
                let v = m[(r, idx)];
                if r == idx {
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                } else {
                    assert_eq!(v.norm(), 0.0);
                }
            }
            // |00> maps into the equal-pair span.
            let col = 0;
            for r in 0..d * d {
                let (a, b) = (r / d, r % d);
                if a != b {
                    assert_eq!(m[(r, col)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn build_circuit_families() {
        let mut rng = seeded_rng(7);
        let generic = build_circuit(ModelFamily::Generic, 4, 2, &mut rng).unwrap();
        let bricks = generic.bricks();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!(
                    bricks[i].matrix().max_abs_diff(bricks[j].matrix()) > 1e-6,
                    "bricks {i} and {j} coincide"
                );
            }
        }

        let scar = build_circuit(ModelFamily::Scar(ProjectorKind::P1), 4, 2, &mut rng)
            .unwrap();
        let e00: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        for brick in scar.bricks() {
            let img = brick.matrix().mul_vec(&e00);
            assert!((img[0] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn build_circuit_deterministic() {
        let a = build_circuit(ModelFamily::PairFlip, 4, 3, &mut seeded_rng(42)).unwrap();
        let b = build_circuit(ModelFamily::PairFlip, 4, 3, &mut seeded_rng(42)).unwrap();
        for (ga, gb) in a.bricks().iter().zip(b.bricks().iter()) {
            assert_eq!(ga.matrix().data(), gb.matrix().data());
        }
    }

    #[test]
    fn scar_circuit_fixes_target_state_over_many_steps() {
        let mut rng = seeded_rng(8);
        let model = build_circuit(ModelFamily::Scar(ProjectorKind::P1), 4, 2, &mut rng)
            .unwrap();
        let scar = StateVector::new_basis_state(4, 2, &[0, 0, 0, 0]).unwrap();
        let mut state = scar.clone();
        let sched = crate::drive::schedule(10_000);
        for t in 1..=sched.horizon() {
            model.step(&mut state, sched.brick_for_step(t)).unwrap();
        }
        let fidelity = state.inner_product(&scar).unwrap().norm_sqr();
        assert!((fidelity - 1.0).abs() < 1e-10, "fidelity {fidelity}");
    }

    #[test]
    fn pair_flip_confinement() {
        let mut rng = seeded_rng(9);
        let model = build_circuit(ModelFamily::PairFlip, 4, 3, &mut rng).unwrap();
        let decomp = crate::krylov::pair_flip_components(4, 3).unwrap();
        let start = StateVector::new_basis_state(4, 3, &[0, 0, 0, 0]).unwrap();
        let sector = decomp.sector_containing(0);
        let mut state = start;
        let sched = crate::drive::schedule(10_000);
        for t in 1..=sched.horizon() {
            model.step(&mut state, sched.brick_for_step(t)).unwrap();
        }
        let leak = crate::krylov::leakage(state.amplitudes(), sector);
        assert!(leak < 1e-10, "leakage {leak}");
        assert_eq!(sector.len(), 15);
    }

}
