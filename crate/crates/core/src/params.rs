use crate::error::{Error, Result};

/// Highest vertical derivative order in the line and line-pixel energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn from_k(k: u32) -> Result<Self> {
        match k {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidParameter(format!(
                "derivative order must be 1 or 2, got {k}"
            ))),
        }
    }

    pub fn k(self) -> u32 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

/// Weight and exponent of one finite-difference data term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataTerm {
    pub weight: f64,
    pub exponent: f64,
}

/// Parameters shared by all three energies.
///
/// The data term of derivative order `l` is `weight_l * ||diff||_{p_l}^{p_l}`;
/// by default every weight is 1 and every exponent is `p`. The pixel-jitter
/// energy uses only the first-order term and ignores `order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    alpha: f64,
    p: f64,
    order: Order,
    rho: u32,
    terms: [DataTerm; 2],
}

impl EnergyParams {
    pub fn new(alpha: f64, p: f64, order: Order, rho: u32) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and non-negative, got {alpha}"
            )));
        }
        check_exponent(p)?;
        let term = DataTerm {
            weight: 1.0,
            exponent: p,
        };
        Ok(Self {
            alpha,
            p,
            order,
            rho,
            terms: [term; 2],
        })
    }

    /// Overrides the weight and exponent of the derivative term of order
    /// `order`.
    pub fn with_term(mut self, order: Order, weight: f64, exponent: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "term weight must be finite and non-negative, got {weight}"
            )));
        }
        check_exponent(exponent)?;
        self.terms[order.k() as usize - 1] = DataTerm { weight, exponent };
        Ok(self)
    }

    pub fn with_rho(mut self, rho: u32) -> Self {
        self.rho = rho;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn term(&self, order: Order) -> DataTerm {
        self.terms[order.k() as usize - 1]
    }

    /// Number of displacement labels per axis, `2 rho + 1`.
    pub fn labels_per_axis(&self) -> usize {
        2 * self.rho as usize + 1
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exponent p must be finite and positive, got {p}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(EnergyParams::new(0.0, 0.5, Order::First, 0).is_ok());
        assert!(EnergyParams::new(-1.0, 0.5, Order::First, 1).is_err());
        assert!(EnergyParams::new(1.0, 0.0, Order::First, 1).is_err());
        assert!(EnergyParams::new(f64::NAN, 1.0, Order::First, 1).is_err());
        assert!(Order::from_k(3).is_err());
        assert_eq!(Order::from_k(2).unwrap(), Order::Second);
    }

    #[test]
    fn terms_default_to_uniform() {
        let params = EnergyParams::new(0.1, 0.5, Order::Second, 2).unwrap();
        assert_eq!(params.term(Order::First).exponent, 0.5);
        assert_eq!(params.term(Order::Second).weight, 1.0);
        let tuned = params.with_term(Order::Second, 0.25, 1.0).unwrap();
        assert_eq!(
            tuned.term(Order::Second),
            DataTerm {
                weight: 0.25,
                exponent: 1.0
            }
        );
        assert_eq!(tuned.term(Order::First).exponent, 0.5);
        assert_eq!(tuned.labels_per_axis(), 5);
    }
}
