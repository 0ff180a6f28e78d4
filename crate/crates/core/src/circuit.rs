//! Lumped-element evaluation of a realized filter layout.
//!
//! The filter is the cascade
//!
//! ```text
//! series(jωL_T1) · shunt(jω(C1 + C_A)) · series(Z_mid) · shunt(jω(C2 + C_B)) · series(jωL_T4)
//! ```
//!
//! where `L_Ti` is the inductance of conductor segment `i`, `C_A`/`C_B` are
//! the ground-plane capacitances of the two nets on either side of the
//! inductor and `Z_mid` is the inductor plus the two inner trace inductances,
//! paralleled by a coupling bridge between the nets. A conductor overlap
//! between the nets shorts the inductor.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{Cell, ElementKind, GridSpec, RealizedGeometry, SEGMENT_COUNT};
use crate::error::{Error, Result};

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

const MM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    pub eps_r: f64,
    pub mu_r: f64,
    /// Substrate conductivity in S/m. Not used by the lossless model.
    pub substrate_sigma: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            eps_r: 4.5,
            mu_r: 1.0,
            substrate_sigma: 1.0e-8,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_r >= 1.0 && self.mu_r >= 1.0 && self.substrate_sigma >= 0.0) {
            return Err(Error::InvalidConfig(
                "material requires eps_r >= 1, mu_r >= 1, substrate_sigma >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitParams {
    /// Port impedance, Ω.
    pub z0: f64,
    /// Each shunt capacitor, F.
    pub c_shunt: f64,
    /// Series inductor, H.
    pub l_series: f64,
    /// Analysis frequency, Hz.
    pub freq: f64,
    /// Gain applied to the inter-net coupling bridge.
    pub kappa_c: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            z0: 50.0,
            c_shunt: 100e-9,
            l_series: 10e-6,
            freq: 10e6,
            kappa_c: 1.0,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.z0, self.c_shunt, self.l_series, self.freq];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidConfig(
                "z0, c_shunt, l_series and freq must be positive".into(),
            ));
        }
        if !(self.kappa_c.is_finite() && self.kappa_c >= 0.0) {
            return Err(Error::InvalidConfig("kappa_c must be >= 0".into()));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.freq
    }
}

/// Chain (ABCD) matrix of a two-port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortAbcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl TwoPortAbcd {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &TwoPortAbcd) -> Self {
        Self {
            a: self.a * next.a + self.b * next.c,
            b: self.a * next.b + self.b * next.d,
            c: self.c * next.a + self.d * next.c,
            d: self.c * next.b + self.d * next.d,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }
}

pub fn abcd_series(z: Complex64) -> TwoPortAbcd {
    TwoPortAbcd {
        b: z,
        ..TwoPortAbcd::identity()
    }
}

pub fn abcd_shunt(y: Complex64) -> TwoPortAbcd {
    TwoPortAbcd {
        c: y,
        ..TwoPortAbcd::identity()
    }
}

/// Left-to-right cascade; the empty chain is the identity.
pub fn abcd_chain(stages: &[TwoPortAbcd]) -> TwoPortAbcd {
    stages
        .iter()
        .fold(TwoPortAbcd::identity(), |acc, s| acc.then(s))
}

pub fn s21_from_abcd(m: &TwoPortAbcd, z0: f64) -> Result<Complex64> {
    let den = m.a + m.b / z0 + m.c * z0 + m.d;
    if den.norm() == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateNetwork);
    }
    Ok(Complex64::new(2.0, 0.0) / den)
}

pub fn to_db(s21: Complex64) -> f64 {
    20.0 * s21.norm().log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParasitics {
    /// H
    pub inductance: f64,
    /// F
    pub capacitance: f64,
}

/// Parallel-plate capacitance of `cells` over the grounded back side.
pub fn plate_capacitance(cells: &BTreeSet<Cell>, grid: &GridSpec, mat: &MaterialParams) -> f64 {
    let area = cells.len() as f64 * grid.cell_w() * grid.cell_h() * MM * MM;
    EPS0 * mat.eps_r * area / (grid.substrate_h * MM)
}

/// Inductance and ground capacitance of a conductor running `a` to `b`
/// through `cells`.
///
/// Inductance is a sheet over a ground plane, `μ0·μr·h·len/width`, with
/// `len` the Manhattan centre-to-centre length of the terminals (at least
/// one cell) and `width = area/len`, never narrower than one cell width.
pub fn trace_parasitics(
    cells: &BTreeSet<Cell>,
    a: Cell,
    b: Cell,
    grid: &GridSpec,
    mat: &MaterialParams,
) -> Result<TraceParasitics> {
    if cells.is_empty() {
        return Err(Error::EmptyCells);
    }
    let (cw, ch) = (grid.cell_w() * MM, grid.cell_h() * MM);
    let h = grid.substrate_h * MM;
    let area = cells.len() as f64 * cw * ch;

    let manhattan = (a.ix - b.ix).abs() as f64 * cw + (a.iy - b.iy).abs() as f64 * ch;
    let len = manhattan.max(cw.min(ch));
    let width = (area / len).max(cw);

    Ok(TraceParasitics {
        inductance: MU0 * mat.mu_r * h * len / width,
        capacitance: plate_capacitance(cells, grid, mat),
    })
}

fn cell_center(c: Cell, grid: &GridSpec) -> (f64, f64) {
    (
        (c.ix as f64 - 0.5) * grid.cell_w() * MM,
        (c.iy as f64 - 0.5) * grid.cell_h() * MM,
    )
}

/// Coupling capacitance between two disjoint nets:
/// `κ·ε0·εr·Σ area/(d_ij + h)` over all cell pairs.
pub fn bridge_capacitance(
    net_a: &BTreeSet<Cell>,
    net_b: &BTreeSet<Cell>,
    grid: &GridSpec,
    mat: &MaterialParams,
    kappa_c: f64,
) -> Result<f64> {
    if net_a.is_empty() || net_b.is_empty() {
        return Err(Error::EmptyCells);
    }
    let shared = net_a.intersection(net_b).count();
    if shared > 0 {
        return Err(Error::OverlappingNets(shared));
    }
    if kappa_c == 0.0 {
        return Ok(0.0);
    }
    let area = grid.cell_w() * grid.cell_h() * MM * MM;
    let d0 = grid.substrate_h * MM;
    let centers_b: Vec<(f64, f64)> = net_b.iter().map(|&c| cell_center(c, grid)).collect();
    let sum: f64 = net_a
        .iter()
        .map(|&ca| {
            let (xa, ya) = cell_center(ca, grid);
            centers_b
                .iter()
                .map(|&(xb, yb)| area / ((xa - xb).hypot(ya - yb) + d0))
                .sum::<f64>()
        })
        .sum();
    Ok(kappa_c * EPS0 * mat.eps_r * sum)
}

/// Geometry-derived quantities that enter the cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parasitics {
    /// Trace inductance of each segment, H.
    pub l_trace: [f64; SEGMENT_COUNT],
    /// Ground capacitance of the net joining input port, capacitor 1 and inductor, F.
    pub c_net_a: f64,
    /// Ground capacitance of the net joining inductor, capacitor 2 and output port, F.
    pub c_net_b: f64,
    /// Coupling bridge across the inductor, F.
    pub c_bridge: f64,
    /// Inductance of a conductor short across the inductor, if the nets touch.
    pub l_short: Option<f64>,
}

impl Parasitics {
    /// No trace parasitics, no coupling.
    pub fn ideal() -> Self {
        Self {
            l_trace: [0.0; SEGMENT_COUNT],
            c_net_a: 0.0,
            c_net_b: 0.0,
            c_bridge: 0.0,
            l_short: None,
        }
    }

    pub fn extract(
        g: &RealizedGeometry,
        grid: &GridSpec,
        mat: &MaterialParams,
        kappa_c: f64,
    ) -> Result<Self> {
        let mut l_trace = [0.0; SEGMENT_COUNT];
        for (s, segment) in crate::encoding::Segment::ALL.into_iter().enumerate() {
            let (a, b) = g.terminals(segment);
            l_trace[s] = trace_parasitics(&g.segment_cells[s], a, b, grid, mat)?.inductance;
        }

        let net_a: BTreeSet<Cell> = g.segment_cells[0].union(&g.segment_cells[1]).copied().collect();
        let net_b: BTreeSet<Cell> = g.segment_cells[2].union(&g.segment_cells[3]).copied().collect();
        let c_net_a = plate_capacitance(&net_a, grid, mat);
        let c_net_b = plate_capacitance(&net_b, grid, mat);

        // The inductor cell is the one legitimate contact between the nets.
        let inductor = g.cell_of(ElementKind::Inductor);
        let shorted = net_a.intersection(&net_b).any(|&c| c != inductor);
        let l_short = shorted.then_some(MU0 * mat.mu_r * grid.substrate_h * MM);

        let only_a: BTreeSet<Cell> = net_a.difference(&net_b).copied().collect();
        let only_b: BTreeSet<Cell> = net_b.difference(&net_a).copied().collect();
        let c_bridge = if only_a.is_empty() || only_b.is_empty() {
            0.0
        } else {
            bridge_capacitance(&only_a, &only_b, grid, mat, kappa_c)?
        };

        Ok(Self {
            l_trace,
            c_net_a,
            c_net_b,
            c_bridge,
            l_short,
        })
    }
}

/// Series impedance of the middle branch: inductor plus inner traces, in
/// parallel with either a conductor short or the coupling bridge.
///
/// The bridge is a susceptance of magnitude `ω·C_b` acting in the same sense
/// as the inductor branch, so coupling always lowers the effective reactance.
fn middle_impedance(par: &Parasitics, p: &CircuitParams) -> Complex64 {
    let w = p.omega();
    let x_mid = w * (par.l_trace[1] + p.l_series + par.l_trace[2]);
    if let Some(l_short) = par.l_short {
        let x_short = w * l_short;
        return Complex64::new(0.0, x_mid * x_short / (x_mid + x_short));
    }
    if x_mid == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let b_total = 1.0 / x_mid + w * par.c_bridge;
    Complex64::new(0.0, 1.0 / b_total)
}

/// Assembles the five-stage cascade.
pub fn filter_network(par: &Parasitics, p: &CircuitParams) -> TwoPortAbcd {
    let jw = Complex64::new(0.0, p.omega());
    abcd_chain(&[
        abcd_series(jw * par.l_trace[0]),
        abcd_shunt(jw * (p.c_shunt + par.c_net_a)),
        abcd_series(middle_impedance(par, p)),
        abcd_shunt(jw * (p.c_shunt + par.c_net_b)),
        abcd_series(jw * par.l_trace[3]),
    ])
}

pub fn filter_s21(par: &Parasitics, p: &CircuitParams) -> Result<Complex64> {
    s21_from_abcd(&filter_network(par, p), p.z0)
}

/// S21 in dB of a feasible layout.
pub fn evaluate_s21(
    g: &RealizedGeometry,
    grid: &GridSpec,
    mat: &MaterialParams,
    p: &CircuitParams,
) -> Result<f64> {
    let par = Parasitics::extract(g, grid, mat, p.kappa_c)?;
    Ok(to_db(filter_s21(&par, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{Board, DecodeOutcome, DesignVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-300)
    }

    fn geometry(bits: &str) -> RealizedGeometry {
        match Board::default().decode(&bits.parse::<DesignVector>().unwrap()) {
            DecodeOutcome::Feasible(g) => g,
            _ => panic!("infeasible"),
        }
    }

    #[test]
    fn empty_chain_is_identity() {
        assert_eq!(abcd_chain(&[]), TwoPortAbcd::identity());
    }

    #[test]
    fn series_and_shunt_compose_additively() {
        let (z1, z2) = (c(1.5, -2.0), c(0.25, 7.0));
        let m = abcd_chain(&[abcd_series(z1), abcd_series(z2)]);
        assert!(close(m.b, z1 + z2, 1e-15));
        assert_eq!(m.c, c(0.0, 0.0));
        let m = abcd_chain(&[abcd_shunt(z1), abcd_shunt(z2)]);
        assert!(close(m.c, z1 + z2, 1e-15));
        assert_eq!(m.b, c(0.0, 0.0));
    }

    #[test]
    fn through_connection_is_unity() {
        let s = s21_from_abcd(&TwoPortAbcd::identity(), 50.0).unwrap();
        assert_eq!(s, c(1.0, 0.0));
        assert_eq!(to_db(s), 0.0);
    }

    #[test]
    fn degenerate_network_is_an_error() {
        let m = TwoPortAbcd {
            a: c(0.0, 0.0),
            b: c(0.0, 0.0),
            c: c(0.0, 0.0),
            d: c(0.0, 0.0),
        };
        assert!(matches!(s21_from_abcd(&m, 50.0), Err(Error::DegenerateNetwork)));
    }

    #[test]
    fn single_cell_plate_capacitance() {
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        let cell = Cell::new(1, 1);
        let tp = trace_parasitics(&BTreeSet::from([cell]), cell, cell, &grid, &mat).unwrap();
        let expected = 8.854_187_812_8e-12 * 4.5 * (0.015 * (0.1 / 15.0)) / 0.0016;
        assert!((tp.capacitance - expected).abs() < 1e-24);
        assert!((tp.capacitance - 2.49e-12).abs() < 0.01e-12);
        assert!(tp.inductance > 0.0);
    }

    #[test]
    fn trace_parasitics_scale_with_area() {
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        // 2-wide, 8-long vertical strip versus 4-wide; terminals fixed.
        let strip = |w: i32| -> BTreeSet<Cell> {
            (1..=w).flat_map(|ix| (1..=8).map(move |iy| Cell::new(ix, iy))).collect()
        };
        let (a, b) = (Cell::new(1, 8), Cell::new(1, 1));
        let narrow = trace_parasitics(&strip(2), a, b, &grid, &mat).unwrap();
        let wide = trace_parasitics(&strip(4), a, b, &grid, &mat).unwrap();
        assert!((wide.capacitance / narrow.capacitance - 2.0).abs() < 1e-12);
        assert!((narrow.inductance / wide.inductance - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_cells_rejected() {
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        let empty = BTreeSet::new();
        let a = Cell::new(1, 1);
        assert!(trace_parasitics(&empty, a, a, &grid, &mat).is_err());
        assert!(bridge_capacitance(&empty, &BTreeSet::from([a]), &grid, &mat, 1.0).is_err());
    }

    #[test]
    fn bridge_basics() {
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        let a = BTreeSet::from([Cell::new(1, 1)]);
        let b = BTreeSet::from([Cell::new(1, 7)]);
        assert_eq!(bridge_capacitance(&a, &b, &grid, &mat, 0.0).unwrap(), 0.0);
        let ab = bridge_capacitance(&a, &b, &grid, &mat, 1.0).unwrap();
        let ba = bridge_capacitance(&b, &a, &grid, &mat, 1.0).unwrap();
        assert!((ab - ba).abs() <= 1e-15 * ab);
        let overlap = BTreeSet::from([Cell::new(1, 1), Cell::new(1, 2)]);
        assert!(matches!(
            bridge_capacitance(&a, &overlap, &grid, &mat, 1.0),
            Err(Error::OverlappingNets(1))
        ));
    }

    #[test]
    fn bridge_inverse_distance() {
        // d ≫ d0: a board 100x wider so the 1.6 mm offset is negligible.
        let grid = GridSpec {
            nx: 10,
            ny: 10,
            board_w: 10_000.0,
            board_h: 10_000.0,
            substrate_h: 1.6,
        };
        let mat = MaterialParams::default();
        let a = BTreeSet::from([Cell::new(1, 1)]);
        let near = bridge_capacitance(&a, &BTreeSet::from([Cell::new(3, 1)]), &grid, &mat, 1.0).unwrap();
        let far = bridge_capacitance(&a, &BTreeSet::from([Cell::new(5, 1)]), &grid, &mat, 1.0).unwrap();
        assert!((near / far - 2.0).abs() < 1e-3);
        // Closer is larger.
        let nearer = bridge_capacitance(&a, &BTreeSet::from([Cell::new(2, 1)]), &grid, &mat, 1.0).unwrap();
        assert!(nearer > near);
    }

    #[test]
    fn closed_form_single_stages() {
        let p = CircuitParams::default();
        let w = p.omega();
        let shunt = s21_from_abcd(&abcd_shunt(c(0.0, w * p.c_shunt)), p.z0).unwrap();
        let expected = c(2.0, 0.0) / c(2.0, w * p.c_shunt * p.z0);
        assert!(close(shunt, expected, 1e-12));
        assert!((to_db(shunt) + 43.92).abs() < 0.01);

        let series = s21_from_abcd(&abcd_series(c(0.0, w * p.l_series)), p.z0).unwrap();
        let expected = c(2.0, 0.0) / c(2.0, w * p.l_series / p.z0);
        assert!(close(series, expected, 1e-12));
        assert!((to_db(series) + 16.07).abs() < 0.01);
    }

    #[test]
    fn dummy_planes_add_capacitance_and_coupling() {
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        let g = geometry("0101101010010001100100");
        // Cap1 high, inductor low: a diagonal segment, so the plane is wider than the route.
        let (a, b) = g.terminals(crate::encoding::Segment::Cap1Inductor);
        let plane = crate::encoding::dummy_conductor(a, b, &grid);
        let route = &g.segment_cells[1];
        let tp_route = trace_parasitics(route, a, b, &grid, &mat).unwrap();
        let tp_plane = trace_parasitics(&plane, a, b, &grid, &mat).unwrap();
        assert!(tp_plane.capacitance > tp_route.capacitance);
        assert!(tp_plane.inductance < tp_route.inductance);

        // Same slots and routes on the outer segments, dummies on both middle segments.
        let canonical = Parasitics::extract(&g, &grid, &mat, 1.0).unwrap();
        let dummy = Parasitics::extract(&geometry("0101101010010000000100"), &grid, &mat, 1.0).unwrap();
        let coupling = |p: &Parasitics| p.l_short.map_or(p.c_bridge, |_| f64::INFINITY);
        assert!(coupling(&dummy) > coupling(&canonical));
    }

    #[test]
    fn dummy_middle_segments_evaluate_worse() {
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        let p = CircuitParams::default();
        let canonical = evaluate_s21(&geometry("0101101010010001100100"), &grid, &mat, &p).unwrap();
        let dummy = evaluate_s21(&geometry("0101101010010000000100"), &grid, &mat, &p).unwrap();
        assert!(dummy > canonical, "dummy {dummy} dB vs canonical {canonical} dB");
    }

    #[test]
    fn short_across_inductor_is_detected() {
        // cap1 low, inductor high, cap2 low; both inner segments drop down the
        // inductor column first and share it.
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        let g = geometry("1010011010100001001100");
        let par = Parasitics::extract(&g, &grid, &mat, 1.0).unwrap();
        assert!(par.l_short.is_some());
        let g = geometry("1010011010100100100100");
        let par = Parasitics::extract(&g, &grid, &mat, 1.0).unwrap();
        assert!(par.l_short.is_none());
    }

    #[test]
    fn repeated_evaluation_is_bit_identical() {
        let grid = GridSpec::default();
        let mat = MaterialParams::default();
        let p = CircuitParams::default();
        let g = geometry("0101101010010001100100");
        let first = evaluate_s21(&g, &grid, &mat, &p).unwrap();
        for _ in 0..5 {
            assert_eq!(evaluate_s21(&g, &grid, &mat, &p).unwrap().to_bits(), first.to_bits());
        }
    }
}
