use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{c, Observable, PureState, QError};

/// Index `(x, y)` of the Bell state `|B_xy⟩ = (|0y⟩ + (-1)^x |1ȳ⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellLabel {
    x: u8,
    y: u8,
}

impl BellLabel {
    pub const B00: Self = Self { x: 0, y: 0 };
    pub const B01: Self = Self { x: 0, y: 1 };
    pub const B10: Self = Self { x: 1, y: 0 };
    pub const B11: Self = Self { x: 1, y: 1 };
    /// In basis-index order `B00, B01, B10, B11`.
    pub const ALL: [Self; 4] = [Self::B00, Self::B01, Self::B10, Self::B11];

    pub fn new(x: u8, y: u8) -> Result<Self, QError> {
        if x > 1 || y > 1 {
            return Err(QError::BadBellLabel(format!("{x}{y}")));
        }
        Ok(Self { x, y })
    }

    pub fn x(self) -> u8 {
        self.x
    }

    pub fn y(self) -> u8 {
        self.y
    }

    pub fn index(self) -> usize {
        (2 * self.x + self.y) as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i & 3]
    }

    pub fn state(self) -> PureState {
        let h = FRAC_1_SQRT_2;
        let sign = if self.x == 0 { 1.0 } else { -1.0 };
        let mut amps = vec![c(0.0, 0.0); 4];
        // |0y⟩ has index y, |1ȳ⟩ has index 2 + (1 - y).
        amps[self.y as usize] = c(h, 0.0);
        amps[2 + (1 - self.y) as usize] = c(sign * h, 0.0);
        PureState::from_raw(2, amps)
    }

    /// The correction `σ_{x̄, x⊕y}` that maps Bob's collapsed state back to the input.
    pub fn correction(self) -> Pauli {
        Pauli::from_bits(1 - self.x, self.x ^ self.y)
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}{}", self.x, self.y)
    }
}

impl FromStr for BellLabel {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s.strip_prefix('B').unwrap_or(s).as_bytes();
        match bits {
            [a @ (b'0' | b'1'), b @ (b'0' | b'1')] => Self::new(a - b'0', b - b'0'),
            _ => Err(QError::BadBellLabel(s.to_string())),
        }
    }
}

impl Serialize for BellLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BellLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `σ_μ` for `μ = 00, 01, 10, 11` ↦ `I, σ_x, σ_y, σ_z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(hi: u8, lo: u8) -> Self {
        match (hi & 1, lo & 1) {
            (0, 0) => Pauli::I,
            (0, 1) => Pauli::X,
            (1, 0) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn observable(self) -> Observable {
        match self {
            Pauli::I => Observable::identity(),
            Pauli::X => Observable::sigma_x(),
            Pauli::Y => Observable::sigma_y(),
            Pauli::Z => Observable::sigma_z(),
        }
    }

    /// Signs picked up by the Bloch components `(x, y, z)` under `v ↦ σ v σ`.
    pub fn conjugation_signs(self) -> [f64; 3] {
        match self {
            Pauli::I => [1.0, 1.0, 1.0],
            Pauli::X => [1.0, -1.0, -1.0],
            Pauli::Y => [-1.0, 1.0, -1.0],
            Pauli::Z => [-1.0, -1.0, 1.0],
        }
    }
}
