use serde::{Deserialize, Serialize};

/// Central finite-difference stencil on a periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Second,
    Fourth,
    Sixth,
    #[default]
    Eighth,
}

impl Stencil {
    pub fn order(self) -> usize {
        match self {
            Stencil::Second => 2,
            Stencil::Fourth => 4,
            Stencil::Sixth => 6,
            Stencil::Eighth => 8,
        }
    }

    pub fn from_order(order: usize) -> Option<Self> {
        match order {
            2 => Some(Stencil::Second),
            4 => Some(Stencil::Fourth),
            6 => Some(Stencil::Sixth),
            8 => Some(Stencil::Eighth),
            _ => None,
        }
    }

    /// Half-width of the stencil.
    pub fn reach(self) -> usize {
        self.order() / 2
    }

    /// `c_k` for offsets `k = 1..=reach` in
    /// `f'(x) ≈ Σ c_k (f(x + kΔ) − f(x − kΔ)) / Δ`.
    pub fn first(self) -> &'static [f64] {
        match self {
            Stencil::Second => &[0.5],
            Stencil::Fourth => &[2.0 / 3.0, -1.0 / 12.0],
            Stencil::Sixth => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
            Stencil::Eighth => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        }
    }

    /// `c_k` for offsets `k = 1..=reach` in
    /// `f''(x) ≈ Σ c_k (f(x + kΔ) + f(x − kΔ) − 2 f(x)) / Δ²`.
    pub fn second(self) -> &'static [f64] {
        match self {
            Stencil::Second => &[1.0],
            Stencil::Fourth => &[4.0 / 3.0, -1.0 / 12.0],
            Stencil::Sixth => &[3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
            Stencil::Eighth => &[8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0],
        }
    }
}
