//! Input-output parameterization: the maps `γ, λ, ψ, ω` written in terms of
//! `λ`, and the stacked affine map from `f` to the cost vector
//! `(γ-1, λ, (z-β)(γ-1), (z-β)λ, ψ, ω-1)`.
//!
//! The stack is built from the products of the plant symbols, independently
//! of the system-level block formulas.

use num_complex::Complex64;

use crate::affine::{substitute_decomposition, AffineBlock, AffineMapPair, AssembledMapPair, RawMapPair, SeriesMatrix};
use crate::error::SynthError;
use crate::plant::PlantParams;
use crate::series::{CausalSeries, LaurentSeries, Series};
use crate::sl_maps::{build_r12, causal_maps, decomposition_offset, POLE_TOL};
use crate::spatial::{ExtentVector, LaurentVector};

/// Names of the cost-stack blocks, in stacking order.
pub const IO_BLOCKS: [&str; 6] = ["gamma-1", "lambda", "x2_wy", "x2_wu", "psi", "omega-1"];

/// The four input-output maps and the two maps from the disturbances to `x2`.
#[derive(Clone, Debug, PartialEq)]
pub struct IOMapSet<T> {
    pub gamma: T,
    pub lambda: T,
    pub psi: T,
    pub omega: T,
    /// `(z-β)(γ-1)`, the response of `x2` to the measurement disturbance.
    pub x2_wy: T,
    /// `(z-β)λ`, the response of `x2` to the input disturbance.
    pub x2_wu: T,
}

impl<T> IOMapSet<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> IOMapSet<U> {
        IOMapSet {
            gamma: f(&self.gamma),
            lambda: f(&self.lambda),
            psi: f(&self.psi),
            omega: f(&self.omega),
            x2_wy: f(&self.x2_wy),
            x2_wu: f(&self.x2_wu),
        }
    }

    pub fn named(&self) -> [(&'static str, &T); 6] {
        [
            ("gamma", &self.gamma),
            ("lambda", &self.lambda),
            ("psi", &self.psi),
            ("omega", &self.omega),
            ("x2_wy", &self.x2_wy),
            ("x2_wu", &self.x2_wu),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IOExtents {
    pub gamma: usize,
    pub lambda: usize,
    pub psi: usize,
    pub omega: usize,
}

pub fn io_extents(e: usize) -> IOExtents {
    IOExtents {
        gamma: (e + 1).max(2),
        lambda: e.max(1),
        psi: (e + 2).max(3),
        omega: (e + 1).max(2),
    }
}

impl IOMapSet<ExtentVector> {
    pub fn measured_extents(&self) -> IOExtents {
        IOExtents {
            gamma: self.gamma.ext(),
            lambda: self.lambda.ext(),
            psi: self.psi.ext(),
            omega: self.omega.ext(),
        }
    }

    /// The six cost maps in stacking order.
    pub fn cost_stack(&self) -> [ExtentVector; 6] {
        let delta = ExtentVector::impulse(0, CausalSeries::constant(1.0));
        [
            self.gamma.minus(&delta),
            self.lambda.clone(),
            self.x2_wy.clone(),
            self.x2_wu.clone(),
            self.psi.clone(),
            self.omega.minus(&delta),
        ]
    }

    pub fn eval_at(&self, theta: f64, z: Complex64) -> IOMapSet<Complex64> {
        self.map(|v| v.spatial_eval(theta).eval(z))
    }
}

/// The maps as functions of `λ` at a fixed spatial frequency.
pub fn io_freq_maps(p: &PlantParams, theta: f64, lambda: &CausalSeries) -> IOMapSet<LaurentSeries> {
    let l = lambda.to_laurent();
    let zb = p.z_minus_beta();
    let sym = &zb * &LaurentSeries::z_minus(p.sigma_at(theta));
    let gamma = &sym * &l;
    let psi = &(&(&sym * &sym) * &l) - &sym;
    let gm1 = &gamma - &LaurentSeries::constant(1.0);
    IOMapSet {
        x2_wy: &zb * &gm1,
        x2_wu: &zb * &l,
        omega: gamma.clone(),
        gamma,
        lambda: l,
        psi,
    }
}

/// The same maps evaluated at a point `z`, given the value of `λ` there.
pub fn io_point_values(p: &PlantParams, theta: f64, z: Complex64, lambda: Complex64) -> IOMapSet<Complex64> {
    let zb = z - p.beta;
    let sym = zb * (z - p.sigma_at(theta));
    let gamma = sym * lambda;
    IOMapSet {
        gamma,
        lambda,
        psi: sym * sym * lambda - sym,
        omega: gamma,
        x2_wy: zb * (gamma - 1.0),
        x2_wu: zb * lambda,
    }
}

/// `λ = S f + g`; the decomposition coincides with that of `r12`.
pub fn build_lambda(p: &PlantParams, f: &ExtentVector) -> ExtentVector {
    build_r12(p, f)
}

/// Spatial kernel of `γ`'s symbol `(z-β)(z-σ)`.
fn gamma_kernel(p: &PlantParams) -> LaurentVector {
    p.z_minus_sigma_kernel().times_series(&p.z_minus_beta())
}

/// The six raw blocks acting on `λ` of extent `E + 1`.
pub fn build_io_blocks(p: &PlantParams, e: usize) -> RawMapPair {
    let input = e + 1;
    let zb = p.z_minus_beta();
    let gk = gamma_kernel(p);
    let psi_k = gk.convolve(&gk);
    let minus_delta = LaurentVector::impulse(0, LaurentSeries::constant(-1.0));

    let v_gamma = SeriesMatrix::from_kernel(&gk, input + 1, input);
    let v_lambda = SeriesMatrix::identity(input);
    let v_psi = SeriesMatrix::from_kernel(&psi_k, input + 2, input);

    AffineMapPair {
        input_extent: input,
        blocks: vec![
            AffineBlock::new("gamma-1", v_gamma.clone(), minus_delta.clone()),
            AffineBlock::new("lambda", v_lambda.clone(), LaurentVector::zeros(input)),
            AffineBlock::new("x2_wy", v_gamma.times_series(&zb), minus_delta.times_series(&zb)),
            AffineBlock::new("x2_wu", v_lambda.times_series(&zb), LaurentVector::zeros(input)),
            AffineBlock::new("psi", v_psi, gk.scaled(-1.0)),
            AffineBlock::new("omega-1", v_gamma, minus_delta),
        ],
    }
}

/// The stacked map `f ↦ V f + h` from the free parameter of extent `E` to the cost vector.
pub fn assemble_io(p: &PlantParams, e: usize) -> Result<AssembledMapPair, SynthError> {
    substitute_decomposition(&build_io_blocks(p, e), &decomposition_offset(p))
}

/// Index-domain maps from a given `λ`, before any causality check.
pub fn io_index_maps(p: &PlantParams, lambda: &ExtentVector) -> IOMapSet<LaurentVector> {
    let zb = p.z_minus_beta();
    let gk = gamma_kernel(p);
    let l = lambda.to_laurent();
    let gamma = l.convolve(&gk);
    let delta = LaurentVector::impulse(0, LaurentSeries::constant(1.0));
    IOMapSet {
        psi: l.convolve(&gk.convolve(&gk)).minus(&gk),
        x2_wy: gamma.minus(&delta).times_series(&zb),
        x2_wu: l.times_series(&zb),
        omega: gamma.clone(),
        gamma,
        lambda: l,
    }
}

impl IOMapSet<LaurentVector> {
    pub fn to_causal(&self) -> Result<IOMapSet<ExtentVector>, SynthError> {
        let mut it = causal_maps(&self.named())?.into_iter();
        let mut next = || it.next().expect("six maps");
        Ok(IOMapSet {
            gamma: next(),
            lambda: next(),
            psi: next(),
            omega: next(),
            x2_wy: next(),
            x2_wu: next(),
        })
    }
}

pub fn io_maps_from_f(p: &PlantParams, f: &ExtentVector) -> Result<IOMapSet<ExtentVector>, SynthError> {
    io_index_maps(p, &build_lambda(p, f)).to_causal()
}

/// `ψ γ^-1` at a point.
pub fn controller_from_io_maps(v: &IOMapSet<Complex64>) -> Result<Complex64, SynthError> {
    if v.gamma.norm() < POLE_TOL {
        return Err(SynthError::PoleProximity { magnitude: v.gamma.norm() });
    }
    Ok(v.psi / v.gamma)
}

/// The controller `ψ/γ` for a given value `f(θ, z)` of the free parameter.
pub fn recover_controller_io(p: &PlantParams, f_eval: Complex64, theta: f64, z: Complex64) -> Result<Complex64, SynthError> {
    let s = p.sigma_at(theta);
    let lambda = z.powi(-2) + z.powi(-3) * (s + p.beta) + z.powi(-4) * f_eval;
    controller_from_io_maps(&io_point_values(p, theta, z, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::causal_check;
    use crate::sl_maps::{assemble_sl, recover_controller_sl};
    use crate::spatial::random_fir;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn reference_plant() -> PlantParams {
        PlantParams::default()
    }

    #[test]
    fn freq_maps_examples() {
        let p = reference_plant();
        let zero = io_freq_maps(&p, 0.3, &CausalSeries::zero());
        assert!(zero.gamma.is_zero() && zero.omega.is_zero());
        let sym = &p.z_minus_beta() * &LaurentSeries::z_minus(p.sigma_at(0.3));
        assert!(zero.psi.max_abs_diff(&-sym) < 1e-15);
        assert!(!causal_check(&zero.psi, 1e-12).causal);

        let any = io_freq_maps(&p, 2.2, &CausalSeries::new(vec![0.0, 0.5, -1.0, 2.0]));
        assert_eq!(any.gamma, any.omega);

        let theta = 1.9;
        let s = p.sigma_at(theta);
        let lam = CausalSeries::new(vec![0.0, 0.0, 1.0, s + p.beta]);
        assert!(causal_check(&io_freq_maps(&p, theta, &lam).psi, 1e-12).causal);
    }

    #[test]
    fn lambda_matches_r12() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for e in 0..4 {
            let f = random_fir(&mut rng, e, 4);
            assert_eq!(build_lambda(&reference_plant(), &f), build_r12(&reference_plant(), &f));
        }
        let r = build_lambda(&reference_plant(), &ExtentVector::zeros(0));
        assert!((r.at(1).coeff(3) - 1.2).abs() < 1e-15);
        let decoupled = PlantParams::new(1.5, 1.0, 0.0).unwrap();
        assert_eq!(build_lambda(&decoupled, &ExtentVector::zeros(1)).ext(), 0);
    }

    #[test]
    fn stack_structure() {
        let p = reference_plant();
        let raw = build_io_blocks(&p, 2);
        let sl_raw = crate::sl_maps::build_sl_blocks(&p, 2);
        assert_eq!(raw.blocks[0].h.at(0), LaurentSeries::constant(-1.0));
        assert!(raw.blocks[4].v.max_abs_diff(&sl_raw.blocks[4].v) < 1e-13);
        assert_eq!(raw.total_rows(), sl_raw.total_rows());

        let io = assemble_io(&p, 2).unwrap();
        let sl = assemble_sl(&p, 2).unwrap();
        assert!(io.compare(&sl).diff < 1e-12);
        let names: Vec<_> = io.blocks.iter().map(|b| b.name.as_str()).collect();
        assert_eq!(names, IO_BLOCKS);
    }

    #[test]
    fn extents_table() {
        assert_eq!(io_extents(5), IOExtents { gamma: 6, lambda: 5, psi: 7, omega: 6 });
        assert_eq!(io_extents(0), IOExtents { gamma: 2, lambda: 1, psi: 3, omega: 2 });
        assert_eq!(io_extents(1).lambda, 1);
    }

    #[test]
    fn controller_matches_sl_formula() {
        let p = reference_plant();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let theta = rng.gen_range(0.0..2.0 * PI);
            let z = Complex64::from_polar(2.0, rng.gen_range(0.0..2.0 * PI));
            let f = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let io = recover_controller_io(&p, f, theta, z).unwrap();
            let sl = recover_controller_sl(&p, f, theta, z).unwrap();
            assert!((io - sl).norm() <= 1e-10 * sl.norm());
        }
        let p0 = PlantParams::new(1.5, 0.0, 0.8).unwrap();
        let (theta, z) = (0.4, Complex64::new(1.1, 0.2));
        let s = p0.sigma_at(theta);
        let k = recover_controller_io(&p0, Complex64::new(0.0, 0.0), theta, z).unwrap();
        assert!((k + z * s * s / (z + s)).norm() < 1e-12);
    }

    #[test]
    fn zero_gamma_is_rejected() {
        let p = reference_plant();
        let (theta, z) = (0.5, Complex64::new(0.9, -0.4));
        let f = -(z * z + (p.sigma_at(theta) + p.beta) * z);
        assert!(matches!(
            recover_controller_io(&p, f, theta, z),
            Err(SynthError::PoleProximity { .. })
        ));
    }

    fn arb_params() -> impl Strategy<Value = PlantParams> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, k)| PlantParams::new(a, b, k).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn x2_blocks_are_scaled_copies(p in arb_params(), e in 0usize..4) {
            let a = assemble_io(&p, e).unwrap();
            let zb = p.z_minus_beta();
            for (scaled, base) in [(2usize, 0usize), (3, 1)] {
                let want_v = a.blocks[base].v.to_laurent().times_series(&zb);
                prop_assert!(a.blocks[scaled].v.to_laurent().max_abs_diff(&want_v) < 1e-12);
                let want_h = a.blocks[base].h.to_laurent().times_series(&zb);
                prop_assert!(a.blocks[scaled].h.to_laurent().max_abs_diff(&want_h) < 1e-12);
            }
            prop_assert_eq!(&a.blocks[0].v, &a.blocks[5].v);
            prop_assert_eq!(&a.blocks[0].h, &a.blocks[5].h);
        }

        #[test]
        fn index_maps_match_frequency_formulas(p in arb_params(), e in 0usize..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fir(&mut rng, e, 4);
            let maps = io_maps_from_f(&p, &f).unwrap();
            let lam = build_lambda(&p, &f);
            for i in 0..16 {
                let theta = 2.0 * PI * i as f64 / 16.0;
                let l = lam.spatial_eval(theta);
                let at_re = io_freq_maps(&p, theta, &l.real_part());
                let at_im = io_freq_maps(&p, theta, &l.imag_part());
                let at_0 = io_freq_maps(&p, theta, &CausalSeries::zero());
                for (i, (name, idx)) in maps.named().into_iter().enumerate() {
                    let got = idx.spatial_eval(theta);
                    let re = at_re.named()[i].1.causal_part();
                    let im = (at_im.named()[i].1 - at_0.named()[i].1).causal_part();
                    prop_assert!(got.real_part().max_abs_diff(&re) < 1e-10, "{} real part", name);
                    prop_assert!(got.imag_part().max_abs_diff(&im) < 1e-10, "{} imaginary part", name);
                }
            }
        }

        #[test]
        fn assembled_stack_equals_index_maps(p in arb_params(), e in 0usize..4, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fir(&mut rng, e, 3);
            let a = assemble_io(&p, e).unwrap();
            let maps = io_maps_from_f(&p, &f).unwrap();
            for (got, want) in a.evaluate(&f).iter().zip(maps.cost_stack().iter()) {
                prop_assert!(got.max_abs_diff(want) < 1e-11);
            }
        }

        #[test]
        fn generic_extents_attain_bounds(e in 0usize..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fir(&mut rng, e, 3);
            let maps = io_maps_from_f(&reference_plant(), &f).unwrap();
            prop_assert_eq!(maps.measured_extents(), io_extents(e));
        }
    }
}
