//! Stacked-metasurface geometry and wave propagation through it.
//!
//! A SIM is `L` coaxial transmissive layers of `N` meta-atoms each. Atoms sit
//! on a square `√N × √N` grid; layers are separated by a uniform spacing
//! `thickness / (L − 1)`. Each atom applies a unit-modulus phase coefficient
//! `e^{jψ}`, and adjacent layers couple through the Rayleigh-Sommerfeld
//! diffraction matrix `Ω`, whose `(m, m̃)` entry is
//!
//! ```text
//! ω = (A_t · cos χ / r) · (1/(2πr) − j/λ) · e^{j·2πr/λ}
//! ```
//!
//! with `r` the transmission distance from atom `m̃` to atom `m`, `χ` the
//! angle between the layer normal and that ray (`cos χ = spacing / r` for a
//! coaxial stack), and `A_t` the atom aperture area.
//!
//! The end-to-end response of the stack is
//! `P = Φ_{L-1} Ω_{L-2} … Ω_0 Φ_0` (zero-based layer indices; `Ω_ℓ` maps
//! layer `ℓ` to layer `ℓ+1`), and [`cascade_split`] factors it around any one
//! layer as `P = B_ℓ Φ_ℓ A_ℓ` for the per-layer optimization steps.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::linalg;
use crate::rng;
use crate::{CMat, CVec};

/// Propagation speed used to derive wavelengths from carrier frequencies, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error("atoms per layer must be a positive perfect square, got {0}")]
    NotPerfectSquare(usize),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("layer count must be at least 1")]
    NoLayers,
    #[error("geometry has a single layer, no inter-layer spacing")]
    SingleLayer,
    #[error("atom index {index} out of range for {atoms} atoms")]
    AtomIndex { index: usize, atoms: usize },
    #[error("zero transmission distance between atoms")]
    ZeroDistance,
    #[error("layer index {layer} out of range for {layers} layers")]
    LayerIndex { layer: usize, layers: usize },
    #[error("phase stack has {stack} layers but geometry expects {geom}")]
    LayerMismatch { stack: usize, geom: usize },
    #[error("phase profile width {got} does not match {want} atoms per layer")]
    AtomMismatch { got: usize, want: usize },
    #[error("diffraction matrix is numerically singular")]
    SingularDiffraction,
    #[error("phase stack is empty or ragged")]
    MalformedStack,
}

/// Physical layout of one SIM.
#[derive(Debug, Clone, PartialEq)]
pub struct SimGeometry {
    /// Number of transmissive layers `L ≥ 1`.
    pub layers: usize,
    /// Meta-atoms per layer `N`, a positive perfect square.
    pub atoms_per_layer: usize,
    /// Carrier wavelength λ, meters.
    pub wavelength: f64,
    /// Center-to-center atom spacing within a layer, meters.
    pub atom_pitch: f64,
    /// Aperture area `A_t` of one atom, square meters.
    pub atom_area: f64,
    /// Axial extent of the stack, meters. Unused when `layers == 1`.
    pub thickness: f64,
}

impl SimGeometry {
    /// Geometry with the default half-wavelength pitch and `(λ/2)²` atom area.
    pub fn new(
        layers: usize,
        atoms_per_layer: usize,
        wavelength: f64,
        thickness: f64,
    ) -> Result<Self, PropagationError> {
        let pitch = wavelength / 2.0;
        Self::with_pitch_and_area(layers, atoms_per_layer, wavelength, thickness, pitch, pitch * pitch)
    }

    pub fn with_pitch_and_area(
        layers: usize,
        atoms_per_layer: usize,
        wavelength: f64,
        thickness: f64,
        atom_pitch: f64,
        atom_area: f64,
    ) -> Result<Self, PropagationError> {
        if layers == 0 {
            return Err(PropagationError::NoLayers);
        }
        let side = (atoms_per_layer as f64).sqrt().round() as usize;
        if atoms_per_layer == 0 || side * side != atoms_per_layer {
            return Err(PropagationError::NotPerfectSquare(atoms_per_layer));
        }
        if wavelength <= 0.0 {
            return Err(PropagationError::NonPositive("wavelength"));
        }
        if atom_pitch <= 0.0 {
            return Err(PropagationError::NonPositive("atom pitch"));
        }
        if atom_area <= 0.0 {
            return Err(PropagationError::NonPositive("atom area"));
        }
        if layers >= 2 && thickness <= 0.0 {
            return Err(PropagationError::NonPositive("thickness"));
        }
        Ok(Self { layers, atoms_per_layer, wavelength, atom_pitch, atom_area, thickness })
    }

    /// Side of the square atom grid, `√N`.
    pub fn grid_side(&self) -> usize {
        (self.atoms_per_layer as f64).sqrt().round() as usize
    }

    /// Spacing between adjacent layers, `thickness / (L − 1)`.
    pub fn layer_spacing(&self) -> Result<f64, PropagationError> {
        if self.layers < 2 {
            return Err(PropagationError::SingleLayer);
        }
        Ok(self.thickness / (self.layers - 1) as f64)
    }

    /// Lateral `(x, y)` offset of atom `n` from the layer center. Atoms are
    /// numbered row-major over the grid, and the grid is centered on the
    /// stack axis.
    pub fn atom_offset(&self, n: usize) -> Result<(f64, f64), PropagationError> {
        if n >= self.atoms_per_layer {
            return Err(PropagationError::AtomIndex { index: n, atoms: self.atoms_per_layer });
        }
        let side = self.grid_side();
        let half = (side - 1) as f64 / 2.0;
        let row = (n / side) as f64;
        let col = (n % side) as f64;
        Ok(((row - half) * self.atom_pitch, (col - half) * self.atom_pitch))
    }
}

/// Phase configuration of a whole stack, stored as angles in `[0, 2π)` so the
/// corresponding coefficients are unit-modulus by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStack {
    angles: Vec<Vec<f64>>,
}

fn wrap_angle(psi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut w = psi.rem_euclid(tau);
    // rem_euclid can return exactly tau after rounding for tiny negatives.
    if w >= tau {
        w -= tau;
    }
    w
}

impl PhaseStack {
    /// All-zero phases (identity layers).
    pub fn zeros(layers: usize, atoms: usize) -> Self {
        Self { angles: vec![vec![0.0; atoms]; layers] }
    }

    /// Wraps arbitrary angles into `[0, 2π)`; rejects empty or ragged input.
    pub fn from_angles(angles: Vec<Vec<f64>>) -> Result<Self, PropagationError> {
        if angles.is_empty() || angles[0].is_empty() {
            return Err(PropagationError::MalformedStack);
        }
        let width = angles[0].len();
        if angles.iter().any(|row| row.len() != width) {
            return Err(PropagationError::MalformedStack);
        }
        let angles = angles
            .into_iter()
            .map(|row| row.into_iter().map(wrap_angle).collect())
            .collect();
        Ok(Self { angles })
    }

    /// Independent uniform phases on every atom.
    pub fn uniform_random(layers: usize, atoms: usize, rng: &mut impl Rng) -> Self {
        let angles = (0..layers)
            .map(|_| (0..atoms).map(|_| rng::uniform_phase(rng)).collect())
            .collect();
        Self { angles }
    }

    pub fn layers(&self) -> usize {
        self.angles.len()
    }

    pub fn atoms(&self) -> usize {
        self.angles[0].len()
    }

    pub fn angle(&self, layer: usize, atom: usize) -> f64 {
        self.angles[layer][atom]
    }

    pub fn layer_angles(&self, layer: usize) -> &[f64] {
        &self.angles[layer]
    }

    pub fn set_angle(&mut self, layer: usize, atom: usize, psi: f64) {
        self.angles[layer][atom] = wrap_angle(psi);
    }

    /// Copy of the stack with one layer's angles replaced.
    pub fn with_layer(&self, layer: usize, angles: &[f64]) -> Result<Self, PropagationError> {
        if layer >= self.layers() {
            return Err(PropagationError::LayerIndex { layer, layers: self.layers() });
        }
        if angles.len() != self.atoms() {
            return Err(PropagationError::AtomMismatch { got: angles.len(), want: self.atoms() });
        }
        let mut out = self.clone();
        out.angles[layer] = angles.iter().map(|&a| wrap_angle(a)).collect();
        Ok(out)
    }

    /// Unit-modulus coefficients `e^{jψ}` of one layer.
    pub fn coefficients(&self, layer: usize) -> CVec {
        CVec::from_iterator(
            self.atoms(),
            self.angles[layer].iter().map(|&a| Complex64::from_polar(1.0, a)),
        )
    }

    /// Diagonal phase-shift matrix `Φ_ℓ` of one layer.
    pub fn phi(&self, layer: usize) -> CMat {
        linalg::diag(&self.coefficients(layer))
    }
}

/// Inter-layer diffraction matrices `Ω_0 … Ω_{L-2}`.
#[derive(Debug, Clone)]
pub struct DiffractionSet {
    matrices: Vec<CMat>,
}

impl DiffractionSet {
    /// The empty set matching a single-layer stack, where no inter-layer
    /// propagation occurs.
    pub fn single_layer() -> Self {
        DiffractionSet { matrices: Vec::new() }
    }

    pub fn count(&self) -> usize {
        self.matrices.len()
    }

    /// `Ω_ℓ`, mapping layer `ℓ` to layer `ℓ+1`.
    pub fn omega(&self, layer: usize) -> &CMat {
        &self.matrices[layer]
    }
}

/// Rayleigh-Sommerfeld coupling coefficient from `source_atom` on one layer
/// to `dest_atom` on the next.
pub fn diffraction_coefficient(
    geom: &SimGeometry,
    source_atom: usize,
    dest_atom: usize,
) -> Result<Complex64, PropagationError> {
    let spacing = geom.layer_spacing()?;
    let (sx, sy) = geom.atom_offset(source_atom)?;
    let (dx, dy) = geom.atom_offset(dest_atom)?;
    coefficient_at(geom, spacing, dx - sx, dy - sy)
}

fn coefficient_at(
    geom: &SimGeometry,
    axial: f64,
    lateral_x: f64,
    lateral_y: f64,
) -> Result<Complex64, PropagationError> {
    let r = (axial * axial + lateral_x * lateral_x + lateral_y * lateral_y).sqrt();
    if r == 0.0 {
        return Err(PropagationError::ZeroDistance);
    }
    let cos_chi = axial / r;
    let amplitude = geom.atom_area * cos_chi / r;
    let radial = Complex64::new(1.0 / (std::f64::consts::TAU * r), -1.0 / geom.wavelength);
    let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * r / geom.wavelength);
    Ok(amplitude * radial * phase)
}

/// Diffraction matrix between adjacent layers; entry `(m, m̃)` couples source
/// atom `m̃` to destination atom `m`. The stack is coaxial with uniform
/// spacing, so the same matrix applies to every adjacent pair.
pub fn diffraction_matrix(geom: &SimGeometry) -> Result<CMat, PropagationError> {
    let n = geom.atoms_per_layer;
    let mut omega = CMat::zeros(n, n);
    for dest in 0..n {
        for source in 0..n {
            omega[(dest, source)] = diffraction_coefficient(geom, source, dest)?;
        }
    }
    Ok(omega)
}

/// All `L − 1` inter-layer matrices, validated to be numerically full rank
/// (smallest singular value above `1e-12` of the largest).
pub fn build_diffraction_set(geom: &SimGeometry) -> Result<DiffractionSet, PropagationError> {
    if geom.layers < 2 {
        return Ok(DiffractionSet { matrices: Vec::new() });
    }
    let omega = diffraction_matrix(geom)?;
    if linalg::rank_relative(&omega, 1e-12) < geom.atoms_per_layer {
        return Err(PropagationError::SingularDiffraction);
    }
    Ok(DiffractionSet { matrices: vec![omega; geom.layers - 1] })
}

fn check_dims(stack: &PhaseStack, omega: &DiffractionSet) -> Result<(), PropagationError> {
    if omega.count() + 1 != stack.layers() {
        return Err(PropagationError::LayerMismatch {
            stack: stack.layers(),
            geom: omega.count() + 1,
        });
    }
    for m in &omega.matrices {
        if m.nrows() != stack.atoms() || m.ncols() != stack.atoms() {
            return Err(PropagationError::AtomMismatch { got: m.nrows(), want: stack.atoms() });
        }
    }
    Ok(())
}

/// End-to-end stack response `P = Φ_{L-1} Ω_{L-2} … Ω_0 Φ_0`.
pub fn end_to_end_matrix(stack: &PhaseStack, omega: &DiffractionSet) -> Result<CMat, PropagationError> {
    check_dims(stack, omega)?;
    let mut p = stack.phi(0);
    for l in 1..stack.layers() {
        p = stack.phi(l) * omega.omega(l - 1) * p;
    }
    Ok(p)
}

/// Factors the cascade around `layer` as `P = B · Φ_layer · A`, returning
/// `(A, B)`: `A` collects everything before the layer (`A = I` for the first
/// layer), `B` everything after it (`B = I` for the last).
pub fn cascade_split(
    stack: &PhaseStack,
    omega: &DiffractionSet,
    layer: usize,
) -> Result<(CMat, CMat), PropagationError> {
    check_dims(stack, omega)?;
    if layer >= stack.layers() {
        return Err(PropagationError::LayerIndex { layer, layers: stack.layers() });
    }
    let n = stack.atoms();
    let mut a = linalg::eye(n);
    for l in 0..layer {
        a = omega.omega(l) * stack.phi(l) * a;
    }
    let mut b = linalg::eye(n);
    for l in layer..stack.layers() - 1 {
        b = stack.phi(l + 1) * omega.omega(l) * b;
    }
    Ok((a, b))
}

/// Rounds every angle to the nearest point of the `2^bits`-entry uniform
/// codebook `{2πk / 2^bits}`, in circular distance; exact ties go to the
/// smaller codepoint.
pub fn quantize_profile(stack: &PhaseStack, bits: u32) -> PhaseStack {
    assert!(bits >= 1, "quantization needs at least one bit");
    let tau = std::f64::consts::TAU;
    let levels = 1u64 << bits;
    let step = tau / levels as f64;
    let angles = (0..stack.layers())
        .map(|l| {
            stack
                .layer_angles(l)
                .iter()
                .map(|&psi| {
                    let mut best = 0.0;
                    let mut best_dist = f64::INFINITY;
                    for k in 0..levels {
                        let code = k as f64 * step;
                        let raw = (psi - code).abs();
                        let dist = raw.min(tau - raw);
                        if dist < best_dist {
                            best_dist = dist;
                            best = code;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    PhaseStack { angles }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use crate::rng::{stream_rng, Stream};

    fn unit_geom() -> SimGeometry {
        // λ = 1, two layers one wavelength... thickness chosen so spacing is 1.
        SimGeometry::with_pitch_and_area(2, 4, 1.0, 1.0, 0.5, 0.25).unwrap()
    }

    #[test]
    fn geometry_validates() {
        assert!(matches!(
            SimGeometry::new(2, 3, 1.0, 1.0),
            Err(PropagationError::NotPerfectSquare(3))
        ));
        assert!(matches!(SimGeometry::new(0, 4, 1.0, 1.0), Err(PropagationError::NoLayers)));
        assert!(SimGeometry::new(1, 4, 1.0, 0.0).is_ok());
        assert!(matches!(
            SimGeometry::new(2, 4, 1.0, 0.0),
            Err(PropagationError::NonPositive("thickness"))
        ));
        let g = SimGeometry::new(3, 9, 2.0, 4.0).unwrap();
        assert_eq!(g.grid_side(), 3);
        assert_relative_eq!(g.layer_spacing().unwrap(), 2.0);
        assert_relative_eq!(g.atom_pitch, 1.0);
        assert_relative_eq!(g.atom_area, 1.0);
    }

    #[test]
    fn axial_coefficient_matches_hand_value() {
        // Unit wavelength, unit spacing, quarter-wavelength-squared area:
        // ω = 0.25 · (1/2π − j) · e^{j2π} = 0.0397887… − 0.25j.
        let w = diffraction_coefficient(&unit_geom(), 0, 0).unwrap();
        assert_relative_eq!(w.re, 0.039788735772973836, max_relative = 1e-6);
        assert_relative_eq!(w.im, -0.25, max_relative = 1e-6);
    }

    #[test]
    fn oblique_coefficient_matches_formula() {
        // Adjacent atoms at pitch λ/2 with spacing λ: r = λ√5/2, cos χ = 2/√5.
        let geom = SimGeometry::with_pitch_and_area(2, 4, 1.0, 1.0, 0.5, 0.25).unwrap();
        let w = diffraction_coefficient(&geom, 0, 1).unwrap();
        let r = 5.0_f64.sqrt() / 2.0;
        let cos_chi = 2.0 / 5.0_f64.sqrt();
        let expect = Complex64::new(1.0 / (std::f64::consts::TAU * r), -1.0)
            * Complex64::from_polar(1.0, std::f64::consts::TAU * r)
            * (0.25 * cos_chi / r);
        assert_relative_eq!(w.re, expect.re, max_relative = 1e-12);
        assert_relative_eq!(w.im, expect.im, max_relative = 1e-12);
    }

    #[test]
    fn single_layer_has_no_spacing() {
        let geom = SimGeometry::new(1, 4, 1.0, 0.0).unwrap();
        assert_eq!(geom.layer_spacing(), Err(PropagationError::SingleLayer));
        assert!(diffraction_coefficient(&geom, 0, 0).is_err());
    }

    #[test]
    fn diffraction_set_is_full_rank() {
        let geom = SimGeometry::new(3, 4, 0.0517, 0.155).unwrap();
        let set = build_diffraction_set(&geom).unwrap();
        assert_eq!(set.count(), 2);
        assert_eq!(linalg::rank_relative(set.omega(0), 1e-12), 4);
        assert_eq!(set.omega(0), set.omega(1));
    }

    #[test]
    fn single_layer_cascade_is_phi() {
        let geom = SimGeometry::new(1, 4, 1.0, 0.0).unwrap();
        let omega = build_diffraction_set(&geom).unwrap();
        let mut rng = stream_rng(3, Stream::PhaseInit(0));
        let stack = PhaseStack::uniform_random(1, 4, &mut rng);
        let p = end_to_end_matrix(&stack, &omega).unwrap();
        assert!(linalg::frob(&(&p - stack.phi(0))) < 1e-15);
    }

    #[test]
    fn identity_phases_give_omega() {
        let geom = unit_geom();
        let omega = build_diffraction_set(&geom).unwrap();
        let stack = PhaseStack::zeros(2, 4);
        let p = end_to_end_matrix(&stack, &omega).unwrap();
        assert!(linalg::frob(&(&p - omega.omega(0))) < 1e-15);
    }

    #[test]
    fn layer_count_mismatch_rejected() {
        let geom = unit_geom();
        let omega = build_diffraction_set(&geom).unwrap();
        let stack = PhaseStack::zeros(3, 4);
        assert!(matches!(
            end_to_end_matrix(&stack, &omega),
            Err(PropagationError::LayerMismatch { .. })
        ));
    }

    #[test]
    fn split_ends_are_identity() {
        let geom = SimGeometry::new(3, 4, 0.0517, 0.155).unwrap();
        let omega = build_diffraction_set(&geom).unwrap();
        let mut rng = stream_rng(11, Stream::PhaseInit(0));
        let stack = PhaseStack::uniform_random(3, 4, &mut rng);
        let (a0, _) = cascade_split(&stack, &omega, 0).unwrap();
        let (_, b_last) = cascade_split(&stack, &omega, 2).unwrap();
        assert!(linalg::frob(&(&a0 - linalg::eye(4))) == 0.0);
        assert!(linalg::frob(&(&b_last - linalg::eye(4))) == 0.0);
    }

    #[test]
    fn quantize_one_bit_examples() {
        let stack = PhaseStack::from_angles(vec![vec![
            1.6,
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_2,
        ]])
        .unwrap();
        let q = quantize_profile(&stack, 1);
        assert_relative_eq!(q.angle(0, 0), std::f64::consts::PI);
        assert_relative_eq!(q.angle(0, 1), 0.0);
        // Exact tie between 0 and π resolves to the smaller codepoint.
        assert_relative_eq!(q.angle(0, 2), 0.0);
    }

    #[test]
    fn quantize_wraps_near_tau() {
        let stack = PhaseStack::from_angles(vec![vec![std::f64::consts::TAU - 1e-12]]).unwrap();
        let q = quantize_profile(&stack, 3);
        assert_relative_eq!(q.angle(0, 0), 0.0);
    }

    #[test]
    fn angles_wrap_into_range() {
        let stack = PhaseStack::from_angles(vec![vec![-0.5, 7.0]]).unwrap();
        assert!(stack.angle(0, 0) >= 0.0 && stack.angle(0, 0) < std::f64::consts::TAU);
        assert_relative_eq!(stack.angle(0, 0), std::f64::consts::TAU - 0.5);
        let c = stack.coefficients(0);
        assert_relative_eq!(c[0].norm(), 1.0, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn cascade_split_reconstructs(seed in 0u64..64, layers in 1usize..4) {
            let geom = SimGeometry::new(layers, 4, 0.0517, 0.155).unwrap();
            let omega = build_diffraction_set(&geom).unwrap();
            let mut rng = stream_rng(seed, Stream::PhaseInit(0));
            let stack = PhaseStack::uniform_random(layers, 4, &mut rng);
            let p = end_to_end_matrix(&stack, &omega).unwrap();
            let scale = linalg::frob(&p);
            for l in 0..layers {
                let (a, b) = cascade_split(&stack, &omega, l).unwrap();
                let recon = b * stack.phi(l) * a;
                prop_assert!(linalg::frob(&(recon - &p)) <= 1e-12 * scale);
            }
        }

        #[test]
        fn quantization_is_circularly_nearest(psi in 0.0..std::f64::consts::TAU, bits in 1u32..6) {
            let stack = PhaseStack::from_angles(vec![vec![psi]]).unwrap();
            let q = quantize_profile(&stack, bits);
            let tau = std::f64::consts::TAU;
            let step = tau / (1u64 << bits) as f64;
            let chosen = {
                let raw = (psi - q.angle(0, 0)).abs();
                raw.min(tau - raw)
            };
            for k in 0..(1u64 << bits) {
                let code = k as f64 * step;
                let raw = (psi - code).abs();
                let dist = raw.min(tau - raw);
                prop_assert!(chosen <= dist + 1e-15);
            }
        }
    }
}
