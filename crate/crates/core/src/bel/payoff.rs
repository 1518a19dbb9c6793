use std::fmt;

/// Closed payoff registry. In `d > 1` the payoff acts on the component mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payoff {
    Identity,
    Call { strike: f64 },
    Put { strike: f64 },
    Digital { strike: f64 },
}

impl Payoff {
    #[inline]
    pub fn eval_scalar(&self, z: f64) -> f64 {
        match *self {
            Payoff::Identity => z,
            Payoff::Call { strike } => (z - strike).max(0.0),
            Payoff::Put { strike } => (strike - z).max(0.0),
            Payoff::Digital { strike } => {
                if z > strike {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let z = if x.len() == 1 {
            x[0]
        } else {
            x.iter().sum::<f64>() / x.len() as f64
        };
        self.eval_scalar(z)
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, Payoff::Digital { .. })
    }
}

impl fmt::Display for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::Identity => write!(f, "identity"),
            Payoff::Call { strike } => write!(f, "call({strike})"),
            Payoff::Put { strike } => write!(f, "put({strike})"),
            Payoff::Digital { strike } => write!(f, "digital({strike})"),
        }
    }
}
