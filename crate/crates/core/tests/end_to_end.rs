use localsyn::io_maps::io_maps_from_f;
use localsyn::model_match::{cost_of, solve_finite_extent, sweep, Parameterization, SolverConfig, Which};
use localsyn::oracle::{j_inf, per_theta_cost, OracleConfig};
use localsyn::sl_maps::{sl_index_maps, build_r12, sl_maps_from_f};
use localsyn::spatial::random_fir;
use localsyn::verify::{check_membership, random_params};
use localsyn::{ExtentVector, PlantParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_cfg() -> SolverConfig {
    SolverConfig::default().with_horizon(30)
}

#[test]
fn sweep_costs_bracket_the_oracle() {
    let p = PlantParams::default();
    let cfg = small_cfg();
    let oracle = OracleConfig {
        theta_points: 256,
        horizon: 120,
    };
    let ji = j_inf(&p, &oracle).unwrap();
    let rows = sweep(&p, &[0, 1, 2, 3, 4], &cfg, Which::Both, Some(ji));
    let costs: Vec<f64> = rows.iter().map(|r| r.j_sl().unwrap()).collect();
    for r in &rows {
        let (a, b) = (r.j_sl().unwrap(), r.j_io().unwrap());
        assert!((a - b).abs() <= 1e-9 * a, "E={}: {a} vs {b}", r.extent);
        assert!(r.gap(Parameterization::SystemLevel).unwrap() > 0.0);
    }
    assert!(costs.windows(2).all(|w| w[0] >= w[1]));
    assert!(costs[4] - ji < 1e-3 * ji);
}

#[test]
fn optimal_maps_are_members_and_reproduce_cost() {
    let p = PlantParams::default();
    for e in [0, 2] {
        let pair = Parameterization::SystemLevel.assemble(&p, e).unwrap();
        let res = solve_finite_extent(&pair, &small_cfg()).unwrap();
        assert!((cost_of(&pair, &res.f) - res.j).abs() <= 1e-12 * res.j);
        assert!((res.j_freq_check - res.j).abs() <= 1e-8 * res.j);
        assert!(check_membership(&sl_index_maps(&p, &build_r12(&p, &res.f))).passed());
        let sl = sl_maps_from_f(&p, &res.f).unwrap();
        let io = io_maps_from_f(&p, &res.f).unwrap();
        assert!(sl.r12.max_abs_diff(&io.lambda) < 1e-14);
    }
}

#[test]
fn decoupled_plant_has_flat_spatial_cost() {
    // without coupling, spatial extent buys nothing
    let p = PlantParams::new(0.7, 0.4, 0.0).unwrap();
    let rows = sweep(&p, &[0, 1, 3], &small_cfg(), Which::Sl, None);
    let j0 = rows[0].j_sl().unwrap();
    for r in &rows {
        assert!((r.j_sl().unwrap() - j0).abs() <= 1e-10 * j0);
    }
    let single = per_theta_cost(&p, 0.0, 30).unwrap().sqrt();
    assert!((single - j0).abs() <= 1e-10 * j0);
}

#[test]
fn random_plants_solve_and_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for p in random_params(&mut rng, 4) {
        let rows = sweep(&p, &[1, 2], &small_cfg(), Which::Both, None);
        for r in rows {
            let (a, b) = (r.j_sl().unwrap(), r.j_io().unwrap());
            assert!((a - b).abs() <= 1e-8 * a.max(1.0), "{p:?} E={}", r.extent);
        }
    }
}

#[test]
fn parseval_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for extent in 0..8 {
        let v: ExtentVector = random_fir(&mut rng, extent, 7);
        let a = v.h2_norm().value();
        let b = v.h2_norm_freq(64).unwrap().value();
        assert!((a - b).abs() <= 1e-12 * a);
    }
    assert!(random_fir(&mut rng, 40, 3).h2_norm_freq(64).is_err());
}
