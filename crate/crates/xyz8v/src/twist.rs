use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cpow_i, CMat, C64};

/// Boundary twist (x, y) selecting K = (σ^x)^y (σ^z)^x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Twist {
    pub x: u8,
    pub y: u8,
}

impl Twist {
    pub const PERIODIC: Twist = Twist { x: 0, y: 0 };
    pub const ALL: [Twist; 4] = [
        Twist { x: 0, y: 0 },
        Twist { x: 1, y: 0 },
        Twist { x: 0, y: 1 },
        Twist { x: 1, y: 1 },
    ];
    pub const TWISTED: [Twist; 3] = [Twist { x: 1, y: 0 }, Twist { x: 0, y: 1 }, Twist { x: 1, y: 1 }];

    pub fn new(x: u8, y: u8) -> Result<Self> {
        if x > 1 || y > 1 {
            return Err(Error::Parameter(format!("twist components must be 0 or 1, got ({x},{y})")));
        }
        Ok(Twist { x, y })
    }

    pub fn is_periodic(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn xf(&self) -> f64 {
        self.x as f64
    }

    pub fn yf(&self) -> f64 {
        self.y as f64
    }

    pub fn xy(&self) -> i32 {
        (self.x * self.y) as i32
    }

    /// (−1)^x i^{xy}
    pub fn phase_x(&self) -> C64 {
        sign(self.x as i32) * cpow_i(self.xy())
    }

    /// (−1)^y (−i)^{xy}
    pub fn phase_y_conj(&self) -> C64 {
        sign(self.y as i32) * cpow_i(-self.xy())
    }

    /// (−1)^y i^{xy}
    pub fn phase_y(&self) -> C64 {
        sign(self.y as i32) * cpow_i(self.xy())
    }

    /// (−1)^{x+y+xy}
    pub fn a_sign(&self) -> f64 {
        if (self.x + self.y + self.x * self.y) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// K = (σ^x)^y (σ^z)^x
    pub fn k_matrix(&self) -> CMat {
        let mut k = CMat::identity(2, 2);
        if self.x == 1 {
            k = k * crate::linalg::sigma_z();
        }
        if self.y == 1 {
            k = crate::linalg::sigma_x() * k;
        }
        k
    }

    pub fn label(&self) -> String {
        format!("({},{})", self.x, self.y)
    }
}

impl std::fmt::Display for Twist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

fn sign(p: i32) -> C64 {
    if p.rem_euclid(2) == 0 {
        c(1.0, 0.0)
    } else {
        c(-1.0, 0.0)
    }
}
