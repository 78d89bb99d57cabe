use serde::{Deserialize, Serialize};

use super::Pauli;

/// Bloch vector `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` of a single qubit, `|r| ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Unit vector at polar angle `theta`, azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(cp * st, sp * st, ct)
    }

    pub fn components(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn antipode(self) -> Self {
        self.scaled(-1.0)
    }

    /// Angle to `o` in radians; both vectors are assumed non-zero.
    pub fn angle_to(self, o: Self) -> f64 {
        let cos = self.dot(o) / (self.norm() * o.norm());
        cos.clamp(-1.0, 1.0).acos()
    }

    /// Bloch vector of `σ ρ σ` when `self` is the Bloch vector of `ρ`.
    pub fn conjugated_by(self, p: Pauli) -> Self {
        let [sx, sy, sz] = p.conjugation_signs();
        Self::new(self.x * sx, self.y * sy, self.z * sz)
    }

    /// Single-qubit fidelity `½(1 + r_in·r_out)`, valid for mixed `r_out`.
    pub fn fidelity(r_in: Self, r_out: Self) -> f64 {
        0.5 * (1.0 + r_in.dot(r_out))
    }
}
