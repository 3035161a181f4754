use vpblimit::config::{self, InitConfig, InitKind, Mode, RunConfig, SweepConfig, VectorMode};
use vpblimit::emit::{convergence_table, from_json, to_json, Cell, Document, Table};
use vpblimit::init::{build_well_prepared, limit_fields, scalar_from_modes};
use vpblimit::sweep::{loglog_slope, run_sweep, steps_for, ConvergenceTable};
use vpblimit::{exit_code, Error};
use vpblimit_core::kinetic_solver::CollisionStep;
use vpblimit_core::spatial_field::{ScalarField, SpatialGrid, VectorField};
use vpblimit_core::velocity_space::VelocityQuadrature;

fn zero_init() -> InitConfig {
    InitConfig { kind: InitKind::WellPrepared, rho0: vec![], u0: vec![], theta0: vec![], snapshot: None }
}

#[test]
fn empty_config_gives_defaults() {
    let run: RunConfig = config::parse("").unwrap();
    assert_eq!(run, RunConfig::default());
    let sweep: SweepConfig = config::parse("").unwrap();
    assert_eq!(sweep.epsilons, vec![0.5, 0.25, 0.125]);
    assert_eq!(sweep.d, 2);
    assert_eq!(sweep.points_per_axis, 32);
}

#[test]
fn partial_config_overrides_only_given_keys() {
    let cfg: SweepConfig = config::parse("epsilons = [0.3, 0.1]\ncollision = \"exponential\"\n").unwrap();
    assert_eq!(cfg.epsilons, vec![0.3, 0.1]);
    assert_eq!(cfg.collision, CollisionStep::Exponential);
    assert_eq!(cfg.t_end, SweepConfig::default().t_end);
}

#[test]
fn unknown_keys_are_rejected() {
    let err = config::parse::<RunConfig>("epsilonn = 0.3\n").unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
    assert_eq!(exit_code(&err), 2);
    let err = config::parse::<RunConfig>("[init]\nkind = \"well_prepared\"\n").unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
}

#[test]
fn malformed_toml_is_invalid_input() {
    assert!(matches!(config::parse::<RunConfig>("epsilon = ["), Err(Error::InvalidInput(_))));
    assert!(matches!(config::parse::<RunConfig>("epsilon = \"x\""), Err(Error::InvalidInput(_))));
}

#[test]
fn init_table_parses() {
    let text = "[init]\ntype = \"well_prepared\"\nrho0 = [{ k = [1, 0, 0], amplitude = 0.1 }]\n\
                u0 = [{ component = 1, k = [1, 0, 0], amplitude = 0.2, phase = 0.5 }]\ntheta0 = []\n";
    let cfg: RunConfig = config::parse(text).unwrap();
    assert_eq!(cfg.init.rho0, vec![Mode { k: [1, 0, 0], amplitude: 0.1, phase: 0.0 }]);
    assert_eq!(cfg.init.u0, vec![VectorMode { component: 1, k: [1, 0, 0], amplitude: 0.2, phase: 0.5 }]);
    assert!(cfg.init.theta0.is_empty());
}

#[test]
fn sweep_validation_sorts_and_rejects() {
    let mut cfg = SweepConfig { epsilons: vec![0.125, 0.5, 0.25], ..Default::default() };
    assert_eq!(cfg.validate().unwrap(), vec![0.5, 0.25, 0.125]);
    for bad in [vec![], vec![0.0], vec![1.5], vec![-0.1], vec![0.5, 0.5], vec![f64::NAN]] {
        cfg.epsilons = bad;
        assert!(matches!(cfg.validate(), Err(Error::InvalidInput(_))));
    }
    let base = SweepConfig::default();
    assert!(SweepConfig { order: 0, ..base.clone() }.validate().is_err());
    assert!(SweepConfig { n_cmp: 2, order: 2, ..base.clone() }.validate().is_err());
    assert!(SweepConfig { t_end: 0.51, ..base.clone() }.validate().is_err());
    assert!(SweepConfig { sample_interval: 0.0, ..base.clone() }.validate().is_err());
    assert!(SweepConfig { dt_fraction: 1.5, ..base.clone() }.validate().is_err());
    assert!(SweepConfig { fluid_dt: 0.0, ..base }.validate().is_err());
}

#[test]
fn exit_codes_split_config_and_numerics() {
    assert_eq!(exit_code(&Error::InvalidInput("x".into())), 2);
    assert_eq!(exit_code(&Error::Structure("x".into())), 2);
    assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
    assert_eq!(exit_code(&Error::Linalg("x".into())), 3);
}

#[test]
fn zero_data_is_zero() {
    let grid = SpatialGrid::cube(2, 8).unwrap();
    let quad = VelocityQuadrature::new(6, 1.0).unwrap();
    let (r, u, t) = limit_fields(&grid, &zero_init()).unwrap();
    let g = build_well_prepared(&r, &u, &t, &quad).unwrap();
    assert_eq!(g.dim(), (64, 216));
    assert!(g.iter().all(|&x| x == 0.0));
}

#[test]
fn well_prepared_data_has_the_limit_moments() {
    let grid = SpatialGrid::cube(1, 16).unwrap();
    let quad = VelocityQuadrature::new(6, 1.0).unwrap();
    let rho = ScalarField::zeros(&grid);
    let u = VectorField::zeros(&grid, 3);
    let theta = scalar_from_modes(&grid, &[Mode { k: [1, 0, 0], amplitude: 1.0, phase: 0.0 }]).unwrap();
    let g = build_well_prepared(&rho, &u, &theta, &quad).unwrap();
    let w = quad.weights();
    let nodes = quad.nodes();
    for (i, row) in g.outer_iter().enumerate() {
        let x = i as f64 * std::f64::consts::TAU / 16.0;
        let mass: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
        let energy: f64 =
            row.iter().zip(w).zip(nodes).map(|((a, b), v)| a * b * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).sum();
        assert!(mass.abs() < 1e-12);
        assert!((energy - 3.0 * x.cos()).abs() < 1e-10);
    }
}

#[test]
fn well_prepared_rejects_nonzero_mean_density() {
    let grid = SpatialGrid::cube(1, 16).unwrap();
    let quad = VelocityQuadrature::new(6, 1.0).unwrap();
    let rho = ScalarField::from_fn(&grid, |_| 0.1);
    let u = VectorField::zeros(&grid, 3);
    let theta = ScalarField::zeros(&grid);
    let err = build_well_prepared(&rho, &u, &theta, &quad).unwrap_err();
    assert!(matches!(err, Error::Structure(_)));
}

#[test]
fn well_prepared_rejects_mismatched_grids() {
    let g1 = SpatialGrid::cube(1, 16).unwrap();
    let g2 = SpatialGrid::cube(1, 8).unwrap();
    let quad = VelocityQuadrature::new(6, 1.0).unwrap();
    let err = build_well_prepared(&ScalarField::zeros(&g1), &VectorField::zeros(&g2, 3), &ScalarField::zeros(&g1), &quad)
        .unwrap_err();
    assert!(matches!(err, Error::Structure(_)));
}

#[test]
fn unresolved_or_misplaced_modes_are_rejected() {
    let grid = SpatialGrid::cube(1, 8).unwrap();
    assert!(scalar_from_modes(&grid, &[Mode { k: [4, 0, 0], amplitude: 1.0, phase: 0.0 }]).is_err());
    assert!(scalar_from_modes(&grid, &[Mode { k: [0, 1, 0], amplitude: 1.0, phase: 0.0 }]).is_err());
    let init = InitConfig {
        u0: vec![VectorMode { component: 3, k: [1, 0, 0], amplitude: 1.0, phase: 0.0 }],
        ..zero_init()
    };
    assert!(limit_fields(&grid, &init).is_err());
}

#[test]
fn empty_table_is_header_only() {
    let t = Table::new(&["a", "b"]);
    assert_eq!(t.to_csv().unwrap(), "a,b\n");
}

#[test]
fn table_rejects_ragged_rows() {
    let mut t = Table::new(&["a", "b"]);
    assert!(t.push(vec![Cell::Num(1.0)]).is_err());
    t.push(vec![Cell::Num(0.1), Cell::Empty]).unwrap();
    t.push(vec![Cell::Int(3), Cell::Text("x".into())]).unwrap();
    assert_eq!(t.to_csv().unwrap(), "a,b\n1e-1,\n3,x\n");
}

#[test]
fn csv_floats_round_trip() {
    let xs = [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-17, 6.02e23, -2.5e-300];
    let mut t = Table::new(&["x"]);
    for &x in &xs {
        t.push(vec![Cell::Num(x)]).unwrap();
    }
    let csv = t.to_csv().unwrap();
    let back: Vec<f64> = csv.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(back, xs);
}

#[test]
fn json_document_round_trips() {
    let doc = Document::new("run", RunConfig::default(), vec![0.1, 1.0 / 3.0, 1e-300]);
    let text = to_json(&doc).unwrap();
    let back: Document<RunConfig, Vec<f64>> = from_json(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(to_json(&back).unwrap(), text);
    assert!(from_json::<Document<RunConfig, Vec<f64>>>("{").is_err());
}

#[test]
fn loglog_slope_of_power_law() {
    let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&e: &f64| (e, 3.0 * e * e)).collect();
    let (s, n) = loglog_slope(&pts);
    assert_eq!(n, 3);
    assert!((s.unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(loglog_slope(&[(0.5, 1.0)]).0, None);
    assert_eq!(loglog_slope(&[(0.5, 0.0), (0.25, 0.0)]).0, None);
}

#[test]
fn steps_divide_the_interval() {
    assert_eq!(steps_for(0.025, 0.01), 3);
    assert_eq!(steps_for(0.025, 0.025), 1);
    assert_eq!(steps_for(0.025, 1.0), 1);
    let n = steps_for(0.025, 0.0031);
    assert!(0.025 / n as f64 <= 0.0031);
}

fn small_sweep() -> SweepConfig {
    SweepConfig {
        epsilons: vec![0.5, 0.25],
        d: 1,
        points_per_axis: 8,
        nodes_per_axis: 6,
        angular_order: 6,
        t_end: 0.05,
        init: zero_init(),
        ..Default::default()
    }
}

#[test]
fn zero_data_sweep_has_zero_errors() {
    let table: ConvergenceTable = run_sweep(&small_sweep()).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.rows[0].epsilon, 0.5);
    for row in &table.rows {
        assert!(row.failure.is_none());
        let m = row.metrics.as_ref().unwrap();
        assert_eq!(m.err_u, 0.0);
        assert_eq!(m.err_sigma, 0.0);
        assert_eq!(m.dissipation_integral, 0.0);
        assert_eq!(m.positivity_violations, 0);
    }
    assert!(table.mu > 0.0 && table.kappa > 0.0);
    let csv = convergence_table(&table).unwrap().to_csv().unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn sweep_output_is_deterministic_and_order_invariant() {
    let a = run_sweep(&small_sweep()).unwrap();
    let b = run_sweep(&SweepConfig { epsilons: vec![0.25, 0.5], ..small_sweep() }).unwrap();
    assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
}

#[test]
fn oversized_initial_energy_is_rejected() {
    let cfg = SweepConfig {
        energy_threshold: 1e-6,
        init: InitConfig { theta0: vec![Mode { k: [1, 0, 0], amplitude: 0.5, phase: 0.0 }], ..zero_init() },
        ..small_sweep()
    };
    let err = run_sweep(&cfg).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
}
