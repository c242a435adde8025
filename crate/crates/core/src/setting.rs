use core::f64::consts::PI;
use core::fmt;

/// One of the two measurement settings available to a side.
///
/// For Alice these are α (`Plain`) and α′ (`Prime`); for Bob β and β′.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    Plain = 0,
    Prime = 1,
}

impl Setting {
    pub const BOTH: [Setting; 2] = [Setting::Plain, Setting::Prime];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            0 => Some(Setting::Plain),
            1 => Some(Setting::Prime),
            _ => None,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Setting::Plain => Setting::Prime,
            Setting::Prime => Setting::Plain,
        }
    }
}

/// A (Alice setting, Bob setting) combination. There are exactly four.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingPair {
    pub alice: Setting,
    pub bob: Setting,
}

impl SettingPair {
    /// All pairs in table order: (α,β), (α,β′), (α′,β), (α′,β′).
    pub const ALL: [SettingPair; 4] = [
        SettingPair::new(Setting::Plain, Setting::Plain),
        SettingPair::new(Setting::Plain, Setting::Prime),
        SettingPair::new(Setting::Prime, Setting::Plain),
        SettingPair::new(Setting::Prime, Setting::Prime),
    ];

    pub const fn new(alice: Setting, bob: Setting) -> Self {
        Self { alice, bob }
    }

    /// Position in [`SettingPair::ALL`].
    pub fn index(self) -> usize {
        2 * self.alice.index() + self.bob.index()
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.alice {
            Setting::Plain => "a",
            Setting::Prime => "a'",
        };
        let b = match self.bob {
            Setting::Plain => "b",
            Setting::Prime => "b'",
        };
        write!(f, "({a},{b})")
    }
}

/// Polarizer angles in radians bound to the four settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleSet {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
}

impl AngleSet {
    pub fn new(alpha: f64, alpha_prime: f64, beta: f64, beta_prime: f64) -> Self {
        Self {
            alice: [alpha, alpha_prime],
            bob: [beta, beta_prime],
        }
    }

    /// Angles maximizing CH variant 0 for the maximally entangled state:
    /// α = 67.5°, α′ = 22.5°, β = 45°, β′ = 0°. The three positively signed
    /// pairs sit 22.5° apart and (α, β′) sits 67.5° apart.
    ///
    /// The same set is a maximal-violation set for CHSH under the sign
    /// pattern used by [`crate::inequality::chsh_value`].
    pub fn ch_optimal() -> Self {
        Self::new(3.0 * PI / 8.0, PI / 8.0, PI / 4.0, 0.0)
    }

    pub fn alice_angle(&self, s: Setting) -> f64 {
        self.alice[s.index()]
    }

    pub fn bob_angle(&self, s: Setting) -> f64 {
        self.bob[s.index()]
    }

    /// Flattened as (α, α′, β, β′).
    pub fn to_array(&self) -> [f64; 4] {
        [self.alice[0], self.alice[1], self.bob[0], self.bob[1]]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl Default for AngleSet {
    fn default() -> Self {
        Self::ch_optimal()
    }
}
