//! Rotation gates, CNOT, and Trotterized evolution blocks.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the state index
//! (big-endian labels `|q0 q1 ...>`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, ModelParams, StateVector, UnitaryMatrix};
use crate::{C64, CONSTRUCTION_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Rz,
    Rxx,
    Ryy,
    Cnot,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Rz => 1,
            GateKind::Rxx | GateKind::Ryy | GateKind::Cnot => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Rz => "RZ",
            GateKind::Rxx => "RXX",
            GateKind::Ryy => "RYY",
            GateKind::Cnot => "CNOT",
        }
    }
}

/// A gate with its rotation angle (radians) and target qubits. For CNOT the
/// first target is the control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub angle: Option<f64>,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, angle: Option<f64>, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} needs {} target(s), got {}",
                kind.name(),
                kind.arity(),
                targets.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidGate(format!(
                "{} targets must be distinct",
                kind.name()
            )));
        }
        match (kind, angle) {
            (GateKind::Cnot, None) => {}
            (GateKind::Cnot, Some(_)) => {
                return Err(Error::InvalidGate("CNOT takes no angle".into()));
            }
            (_, Some(a)) if a.is_finite() => {}
            _ => {
                return Err(Error::InvalidGate(format!(
                    "{} needs a finite angle",
                    kind.name()
                )));
            }
        }
        Ok(Self {
            kind,
            angle,
            targets,
        })
    }

    pub fn rx(qubit: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::Rx,
            angle: Some(theta),
            targets: vec![qubit],
        }
    }

    pub fn rz(qubit: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::Rz,
            angle: Some(theta),
            targets: vec![qubit],
        }
    }

    pub fn rxx(a: usize, b: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::Rxx,
            angle: Some(theta),
            targets: vec![a, b],
        }
    }

    pub fn ryy(a: usize, b: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::Ryy,
            angle: Some(theta),
            targets: vec![a, b],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            angle: None,
            targets: vec![control, target],
        }
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Local matrix of a gate: 2×2 for one target, 4×4 in the `|t0 t1>` basis
/// for two targets.
pub fn gate_matrix(g: &Gate) -> UnitaryMatrix {
    let theta = g.angle.unwrap_or(0.0);
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let m = match g.kind {
        GateKind::Rx => {
            DMatrix::from_row_slice(2, 2, &[c(ch, 0.0), c(0.0, -sh), c(0.0, -sh), c(ch, 0.0)])
        }
        GateKind::Rz => DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from_polar(1.0, -theta / 2.0),
                z,
                z,
                C64::from_polar(1.0, theta / 2.0),
            ],
        ),
        // cos(θ/2)·I - i·sin(θ/2)·XX
        GateKind::Rxx => DMatrix::from_row_slice(
            4,
            4,
            &[
                c(ch, 0.0),
                z,
                z,
                c(0.0, -sh),
                z,
                c(ch, 0.0),
                c(0.0, -sh),
                z,
                z,
                c(0.0, -sh),
                c(ch, 0.0),
                z,
                c(0.0, -sh),
                z,
                z,
                c(ch, 0.0),
            ],
        ),
        // cos(θ/2)·I - i·sin(θ/2)·YY
        GateKind::Ryy => DMatrix::from_row_slice(
            4,
            4,
            &[
                c(ch, 0.0),
                z,
                z,
                c(0.0, sh),
                z,
                c(ch, 0.0),
                c(0.0, -sh),
                z,
                z,
                c(0.0, -sh),
                c(ch, 0.0),
                z,
                c(0.0, sh),
                z,
                z,
                c(ch, 0.0),
            ],
        ),
        GateKind::Cnot => DMatrix::from_row_slice(
            4,
            4,
            &[one, z, z, z, z, one, z, z, z, z, z, one, z, z, one, z],
        ),
    };
    UnitaryMatrix::from_trusted(m)
}

/// Number of qubits for a state dimension, if it is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim >= 2).then(|| dim.trailing_zeros() as usize)
}

#[inline]
fn bit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Applies a 2×2 matrix to `qubit` in place.
pub(crate) fn apply_one_qubit(
    amps: &mut DVector<C64>,
    num_qubits: usize,
    qubit: usize,
    m: &[[C64; 2]; 2],
) {
    let mask = bit_mask(num_qubits, qubit);
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Applies a 4×4 matrix (basis `|q_a q_b>`) to the qubit pair in place.
pub(crate) fn apply_two_qubit(
    amps: &mut DVector<C64>,
    num_qubits: usize,
    qa: usize,
    qb: usize,
    m: &DMatrix<C64>,
) {
    let (ma, mb) = (bit_mask(num_qubits, qa), bit_mask(num_qubits, qb));
    for i in 0..amps.len() {
        if i & (ma | mb) == 0 {
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let old = idx.map(|k| amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = (0..4).map(|s| m[(r, s)] * old[s]).sum();
            }
        }
    }
}

/// Applies `g` to raw amplitudes in place without validation.
pub(crate) fn apply_gate_in_place(amps: &mut DVector<C64>, num_qubits: usize, g: &Gate) {
    let local = gate_matrix(g);
    let m = local.matrix();
    match *g.targets.as_slice() {
        [q] => {
            let arr = [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
            apply_one_qubit(amps, num_qubits, q, &arr);
        }
        [a, b] => apply_two_qubit(amps, num_qubits, a, b, m),
        _ => unreachable!("gate arity is validated at construction"),
    }
}

fn check_targets(g: &Gate, num_qubits: usize) -> Result<()> {
    Gate::new(g.kind, g.angle, g.targets.clone())?;
    if let Some(&bad) = g.targets.iter().find(|&&t| t >= num_qubits) {
        return Err(Error::InvalidGate(format!(
            "target {bad} out of range for {num_qubits} qubit(s)"
        )));
    }
    Ok(())
}

pub fn apply_gate(state: &StateVector, g: &Gate) -> Result<StateVector> {
    let n = qubit_count(state.dim()).ok_or(Error::DimensionMismatch {
        expected: state.dim().next_power_of_two(),
        actual: state.dim(),
    })?;
    check_targets(g, n)?;
    let mut out = state.clone();
    apply_gate_in_place(out.amplitudes_mut(), n, g);
    debug_assert!((out.norm_squared() - state.norm_squared()).abs() < CONSTRUCTION_TOL);
    Ok(out)
}

/// Full `2^n × 2^n` matrix of a gate sequence applied in order.
pub fn sequence_unitary(gates: &[Gate], num_qubits: usize) -> Result<UnitaryMatrix> {
    for g in gates {
        check_targets(g, num_qubits)?;
    }
    let dim = 1 << num_qubits;
    let mut full = DMatrix::<C64>::identity(dim, dim);
    for col in 0..dim {
        let mut v = full.column(col).into_owned();
        for g in gates {
            apply_gate_in_place(&mut v, num_qubits, g);
        }
        full.set_column(col, &v);
    }
    Ok(UnitaryMatrix::from_trusted(full))
}

/// Register layout of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One qubit, basis index = site index.
    SingleQubit,
    /// Two qubits; the particle lives in the `{|01>, |10>}` sector.
    TwoQubit,
}

impl Layout {
    pub fn name(self) -> &'static str {
        match self {
            Layout::SingleQubit => "single-qubit",
            Layout::TwoQubit => "two-qubit",
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            Layout::SingleQubit => 1,
            Layout::TwoQubit => 2,
        }
    }

    /// Register basis index encoding two-site index `site`.
    pub fn encode_site(self, site: usize) -> usize {
        match self {
            Layout::SingleQubit => site,
            // site 0 -> |01> (index 1), site 1 -> |10> (index 2)
            Layout::TwoQubit => 1 << site,
        }
    }
}

/// Basis indices of `|01>` and `|10>` in a two-qubit register.
pub const SINGLE_EXCITATION_SECTOR: [usize; 2] = [1, 2];

/// Number of Trotter slices per measurement period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub k: usize,
    pub delta_t: f64,
}

impl TrotterPlan {
    pub fn new(tau: f64, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::param("k", "needs at least one Trotter step"));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::param("tau", "must be > 0"));
        }
        Ok(Self {
            k,
            delta_t: tau / k as f64,
        })
    }

    /// Plan with slice width `delta_t`; `tau / delta_t` must be an integer.
    pub fn from_delta_t(tau: f64, delta_t: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::param("delta_t", "must be > 0"));
        }
        let k = (tau / delta_t).round();
        if k < 1.0 || (k * delta_t - tau).abs() > 1e-9 * tau.max(1.0) {
            return Err(Error::param(
                "delta_t",
                format!("tau = {tau} is not an integer multiple of delta_t = {delta_t}"),
            ));
        }
        Self::new(tau, k as usize)
    }

    pub fn tau(&self) -> f64 {
        self.k as f64 * self.delta_t
    }

    fn check(&self, tau: f64) -> Result<()> {
        if self.k < 1 {
            return Err(Error::param("k", "needs at least one Trotter step"));
        }
        if (self.tau() - tau).abs() > CONSTRUCTION_TOL * tau.max(1.0) {
            return Err(Error::param(
                "delta_t",
                format!("k·delta_t = {} does not match tau = {tau}", self.tau()),
            ));
        }
        Ok(())
    }
}

/// Gates of one Trotter slice, in application order.
///
/// The hopping rotation carries angle `-2γΔt` (single qubit) or `-γΔt` per
/// XX/YY rotation (two qubits) so that both layouts converge to
/// `exp(-i·H·τ)` of `[[U, -γ], [-γ, -U]]`, and the two-qubit slice restricted
/// to `{|01>, |10>}` is the single-qubit slice.
pub fn trotter_slice(params: &ModelParams, plan: &TrotterPlan, layout: Layout) -> Vec<Gate> {
    let dt = plan.delta_t;
    let (g, u) = (params.gamma, params.u);
    match layout {
        Layout::SingleQubit => vec![Gate::rx(0, -2.0 * g * dt), Gate::rz(0, 2.0 * u * dt)],
        Layout::TwoQubit => vec![
            Gate::rxx(0, 1, -g * dt),
            Gate::ryy(0, 1, -g * dt),
            Gate::rz(0, 2.0 * u * dt),
        ],
    }
}

/// `k`-fold product of Trotter slices for one measurement period.
pub fn trotterized_unitary(
    params: &ModelParams,
    plan: &TrotterPlan,
    layout: Layout,
) -> Result<UnitaryMatrix> {
    params.validate()?;
    plan.check(params.tau)?;
    let slice = sequence_unitary(&trotter_slice(params, plan, layout), layout.num_qubits())?;
    let mut total = UnitaryMatrix::identity(slice.dim());
    for _ in 0..plan.k {
        total = slice.compose(&total);
    }
    Ok(total)
}

/// `-(γ/2)(XX + YY) + U·(Z ⊗ I)`; its single-excitation block is the
/// two-site Hamiltonian.
pub fn two_qubit_hamiltonian(params: &ModelParams) -> Result<HermitianMatrix> {
    params.validate()?;
    let (g, u) = (params.gamma, params.u);
    #[rustfmt::skip]
    let rows = [
        u,   0.0, 0.0, 0.0,
        0.0, u,   -g,  0.0,
        0.0, -g,  -u,  0.0,
        0.0, 0.0, 0.0, -u,
    ];
    HermitianMatrix::from_real_rows(4, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{build_two_site_hamiltonian, exact_unitary, max_entry_diff};
    use std::f64::consts::PI;

    #[test]
    fn rx_zero_is_identity() {
        let m = gate_matrix(&Gate::rx(0, 0.0));
        assert!(max_entry_diff(m.matrix(), &DMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn rx_pi_flips_zero_to_minus_i_one() {
        let s = StateVector::basis(2, 0).unwrap();
        let out = apply_gate(&s, &Gate::rx(0, PI)).unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn rotation_matches_hopping_exponential() {
        // e^{-iγσ_xΔt} = RX(2γΔt) and e^{+iγσ_xΔt} = RX(-2γΔt)
        let (gamma, dt) = (0.8, 0.1);
        let h =
            build_two_site_hamiltonian(&ModelParams::two_site(-gamma, 0.0, 1.0).unwrap()).unwrap();
        let minus = exact_unitary(&h, dt); // H = +γσ_x
        assert!(
            max_entry_diff(
                minus.matrix(),
                gate_matrix(&Gate::rx(0, 2.0 * gamma * dt)).matrix()
            ) < 1e-15
        );
        let h =
            build_two_site_hamiltonian(&ModelParams::two_site(gamma, 0.0, 1.0).unwrap()).unwrap();
        let plus = exact_unitary(&h, dt); // H = -γσ_x
        assert!(
            max_entry_diff(
                plus.matrix(),
                gate_matrix(&Gate::rx(0, -2.0 * gamma * dt)).matrix()
            ) < 1e-15
        );
    }

    #[test]
    fn all_gates_unitary() {
        for theta in [-2.1, 0.0, 0.3, PI, 5.0] {
            for g in [
                Gate::rx(0, theta),
                Gate::rz(0, theta),
                Gate::rxx(0, 1, theta),
                Gate::ryy(0, 1, theta),
            ] {
                assert!(gate_matrix(&g).unitarity_defect() < 1e-12);
            }
        }
        assert!(gate_matrix(&Gate::cnot(0, 1)).unitarity_defect() < 1e-15);
    }

    #[test]
    fn xx_yy_block_structure() {
        let theta = 0.9;
        let m = sequence_unitary(&[Gate::rxx(0, 1, theta), Gate::ryy(0, 1, theta)], 2).unwrap();
        let m = m.matrix();
        assert!((m[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(3, 3)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(1, 1)] - c(theta.cos(), 0.0)).norm() < 1e-15);
        assert!((m[(1, 2)] - c(0.0, -theta.sin())).norm() < 1e-15);
        assert!((m[(2, 1)] - c(0.0, -theta.sin())).norm() < 1e-15);
        assert!(m[(0, 3)].norm() < 1e-15 && m[(3, 0)].norm() < 1e-15);
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::new(GateKind::Rx, Some(0.1), vec![0, 1]).is_err());
        assert!(Gate::new(GateKind::Rxx, Some(0.1), vec![1, 1]).is_err());
        assert!(Gate::new(GateKind::Cnot, Some(0.1), vec![0, 1]).is_err());
        assert!(Gate::new(GateKind::Rz, None, vec![0]).is_err());
        let s = StateVector::basis(2, 0).unwrap();
        assert!(apply_gate(&s, &Gate::rx(1, 0.1)).is_err());
        let s3 = StateVector::new(DVector::from_element(3, c(1.0 / 3f64.sqrt(), 0.0))).unwrap();
        assert!(matches!(
            apply_gate(&s3, &Gate::rx(0, 0.1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cnot_is_control_first() {
        let s = StateVector::basis(4, 2).unwrap(); // |10>
        let out = apply_gate(&s, &Gate::cnot(0, 1)).unwrap();
        assert!((out.probability(3) - 1.0).abs() < 1e-15);
        let s = StateVector::basis(4, 1).unwrap(); // |01>
        let out = apply_gate(&s, &Gate::cnot(0, 1)).unwrap();
        assert!((out.probability(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trotter_plan_checks() {
        assert!(TrotterPlan::new(1.0, 0).is_err());
        let plan = TrotterPlan::from_delta_t(3.0, 0.1).unwrap();
        assert_eq!(plan.k, 30);
        assert!((plan.tau() - 3.0).abs() < 1e-12);
        assert!(TrotterPlan::from_delta_t(3.0, 0.7).is_err());
        let p = ModelParams::two_site(1.0, 1.0, 2.0).unwrap();
        let wrong = TrotterPlan::new(1.0, 4).unwrap();
        assert!(trotterized_unitary(&p, &wrong, Layout::SingleQubit).is_err());
    }

    #[test]
    fn two_qubit_sector_matches_single_qubit() {
        let p = ModelParams::two_site(-1.0, 1.0, 3.0).unwrap();
        let plan = TrotterPlan::new(3.0, 7).unwrap();
        let one = trotterized_unitary(&p, &plan, Layout::SingleQubit).unwrap();
        let two = trotterized_unitary(&p, &plan, Layout::TwoQubit).unwrap();
        let block = two.restrict(&SINGLE_EXCITATION_SECTOR);
        assert!(max_entry_diff(one.matrix(), &block) < 1e-12);

        let h4 = two_qubit_hamiltonian(&p).unwrap();
        let h2 = build_two_site_hamiltonian(&p).unwrap();
        let sector = DMatrix::from_fn(2, 2, |r, c| {
            h4.matrix()[(SINGLE_EXCITATION_SECTOR[r], SINGLE_EXCITATION_SECTOR[c])]
        });
        assert_eq!(&sector, h2.matrix());
    }
}
