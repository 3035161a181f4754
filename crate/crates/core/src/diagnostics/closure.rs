use crate::error::{Error, Result};
use crate::kinetic_solver::{KineticModel, KineticSolver, KineticState, Parts};
use crate::spatial_field::ScalarField;
use crate::transport::TransportCoefficients;
use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

/// Both sides of the A- and B-closures and their remainders, as L²_x norms.
/// Relative differences are scaled by the largest of |lhs|, |rhs| and |R|.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClosureRecord {
    pub t: f64,
    pub lhs_a: f64,
    pub rhs_a: f64,
    pub diff_a: f64,
    pub rel_diff_a: f64,
    pub remainder_a: f64,
    pub lhs_b: f64,
    pub rhs_b: f64,
    pub diff_b: f64,
    pub rel_diff_b: f64,
    pub remainder_b: f64,
}

/// Centered (or one-sided when `before` is absent) difference quotient.
pub fn finite_difference_derivative(before: Option<&KineticState>, now: &KineticState, after: &KineticState) -> Array2<f64> {
    match before {
        Some(b) => (&after.g - &b.g) / (after.time - b.time),
        None => (&after.g - &now.g) / (after.time - now.time),
    }
}

fn pair_rows(rows: &Array2<f64>, f: &[f64], w: &[f64]) -> Vec<f64> {
    let wf: Array1<f64> = f.iter().zip(w).map(|(a, b)| a * b).collect();
    rows.dot(&wf).to_vec()
}

fn l2(grid_cv: f64, fields: &[Vec<f64>]) -> f64 {
    (fields.iter().flat_map(|f| f.iter()).map(|x| x * x).sum::<f64>() * grid_cv).sqrt()
}

/// ⟨Â, (1/ε)L(I − P)g⟩ against u⊗u − |u|²I/3 − μΣ(u) − R_A and
/// ⟨B̂, (1/ε)L(I − P)g⟩ against 5c·u − 5κ∇c − R_B, with
/// R_Ξ = −⟨Ξ̂, −ε∂_t g − v·∇(I − P)g + Q(g,g) − Q(Pg,Pg) + γε∇φ·(v − ∇_v)g⟩.
pub fn kinetic_flux_closure(
    solver: &KineticSolver,
    state: &KineticState,
    dtg: ArrayView2<f64>,
    tc: &TransportCoefficients,
) -> Result<ClosureRecord> {
    let model: &KineticModel = solver.model();
    if dtg.dim() != state.g.dim() {
        return Err(Error::Structure("time derivative does not match the state".into()));
    }
    let eps = model.epsilon;
    let grid = &model.grid;
    let vm = &model.velocity;
    let w = vm.quad.weights();
    let g = state.g.view();
    let h = vm.projector.micro(g);
    let pg = vm.projector.project(g);
    let lh = vm.l.apply_rows(h.view()) / eps;

    let stream_h = solver.rhs_parts(h.view(), Parts { stream: true, forcing: false, product: false }) * (-eps);
    let prod = solver.rhs_parts(g, Parts { stream: false, forcing: false, product: true });
    let q_full = vm.q.quadratic_rows(&vm.l, g);
    let q_macro = vm.q.quadratic_rows(&vm.l, pg.view());
    let mut rest = &dtg * (-eps);
    rest -= &stream_h;
    rest += &q_full;
    rest -= &q_macro;
    rest += &(prod * eps);

    let ms = model.macro_state(state);
    let sf = |v: Vec<f64>| ScalarField::new(grid, v);
    let b: Vec<ScalarField> = ms.b.iter().map(|x| sf(x.clone())).collect::<Result<_>>()?;
    let db: Vec<Vec<ScalarField>> = b.iter().map(|bi| (0..3).map(|a| bi.derivative(a)).collect()).collect();
    let nx = grid.len();
    let cv = grid.cell_volume();

    let (mut lhs_a, mut rhs_a, mut diff_a, mut rem_a) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..3 {
        for j in 0..3 {
            let ah = tc.a_hat(i, j);
            let lhs = pair_rows(&lh, ah, w);
            let r: Vec<f64> = pair_rows(&rest, ah, w).iter().map(|x| -x).collect();
            let mut rhs = vec![0.0; nx];
            for x in 0..nx {
                let bb = [b[0].values()[x], b[1].values()[x], b[2].values()[x]];
                let b2 = bb[0] * bb[0] + bb[1] * bb[1] + bb[2] * bb[2];
                let div = db[0][0].values()[x] + db[1][1].values()[x] + db[2][2].values()[x];
                let sigma = db[j][i].values()[x] + db[i][j].values()[x] - if i == j { 2.0 * div / 3.0 } else { 0.0 };
                rhs[x] = bb[i] * bb[j] - if i == j { b2 / 3.0 } else { 0.0 } - tc.mu * sigma - r[x];
            }
            diff_a.push(lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<f64>>());
            lhs_a.push(lhs);
            rhs_a.push(rhs);
            rem_a.push(r);
        }
    }

    let c = sf(ms.c.clone())?;
    let (mut lhs_b, mut rhs_b, mut diff_b, mut rem_b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..3 {
        let bh = tc.b_hat(i);
        let lhs = pair_rows(&lh, bh, w);
        let r: Vec<f64> = pair_rows(&rest, bh, w).iter().map(|x| -x).collect();
        let dc = c.derivative(i);
        let rhs: Vec<f64> =
            (0..nx).map(|x| 5.0 * c.values()[x] * b[i].values()[x] - 5.0 * tc.kappa * dc.values()[x] - r[x]).collect();
        diff_b.push(lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<f64>>());
        lhs_b.push(lhs);
        rhs_b.push(rhs);
        rem_b.push(r);
    }

    let rel = |d: f64, l: f64, r: f64, m: f64| {
        let s = l.max(r).max(m);
        if s > 0.0 {
            d / s
        } else {
            0.0
        }
    };
    let (la, ra, da) = (l2(cv, &lhs_a), l2(cv, &rhs_a), l2(cv, &diff_a));
    let (lb, rb, dbn) = (l2(cv, &lhs_b), l2(cv, &rhs_b), l2(cv, &diff_b));
    Ok(ClosureRecord {
        t: state.time,
        lhs_a: la,
        rhs_a: ra,
        diff_a: da,
        rel_diff_a: rel(da, la, ra, l2(cv, &rem_a)),
        remainder_a: l2(cv, &rem_a),
        lhs_b: lb,
        rhs_b: rb,
        diff_b: dbn,
        rel_diff_b: rel(dbn, lb, rb, l2(cv, &rem_b)),
        remainder_b: l2(cv, &rem_b),
    })
}
