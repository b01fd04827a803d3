//! Single-payment credit default swap.
//!
//! The protection buyer makes one premium payment: the full period's spread
//! at maturity `T` if the loan survives, or the spread accrued to the
//! default time otherwise. Defaults are taken to happen mid-period, at
//! `tau = T / 2`, where the seller pays `(1 - R)` per unit notional.
//! Discounting is continuous at the risk-free rate. Per unit notional:
//!
//! ```text
//! protection   = (1 - R) * pd * D(tau)
//! premium(s)   = s * [(1 - pd) * T * D(T) + pd * tau * D(tau)]
//! fair spread  = protection / [(1 - pd) * T * D(T) + pd * tau * D(tau)]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::ExposureQuote;
use crate::par;

/// `exp(-rate * years)`.
pub fn discount(rate: f64, years: f64) -> f64 {
    (-rate * years).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdsTerms {
    /// Currency amount insured; the loan's EAD.
    pub notional: f64,
    pub maturity_years: f64,
    /// Continuously compounded, per annum.
    pub risk_free_rate: f64,
    /// Probability of default before maturity.
    pub pd: f64,
    pub recovery_rate: f64,
}

impl CdsTerms {
    pub fn validate(&self) -> Result<()> {
        if !(self.maturity_years > 0.0 && self.maturity_years.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "maturity {} must be positive",
                self.maturity_years
            )));
        }
        if !(0.0..=1.0).contains(&self.pd) {
            return Err(Error::InvalidInput(format!(
                "PD {} is outside [0, 1]",
                self.pd
            )));
        }
        if !(0.0..=1.0).contains(&self.recovery_rate) {
            return Err(Error::InvalidInput(format!(
                "recovery rate {} is outside [0, 1]",
                self.recovery_rate
            )));
        }
        if !(self.notional >= 0.0 && self.notional.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "notional {} is invalid",
                self.notional
            )));
        }
        if !self.risk_free_rate.is_finite() {
            return Err(Error::InvalidInput("risk-free rate is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdsQuote {
    pub spread_per_annum: f64,
    pub spread_bps: f64,
    /// Present values in currency at the quoted spread.
    pub premium_leg_value: f64,
    pub protection_leg_value: f64,
}

/// Present value of the premium leg per unit notional and unit spread.
pub fn risky_annuity(terms: &CdsTerms) -> f64 {
    let t = terms.maturity_years;
    let tau = t / 2.0;
    (1.0 - terms.pd) * t * discount(terms.risk_free_rate, t)
        + terms.pd * tau * discount(terms.risk_free_rate, tau)
}

/// Present value of the protection leg per unit notional.
pub fn protection_value(terms: &CdsTerms) -> f64 {
    let tau = terms.maturity_years / 2.0;
    (1.0 - terms.recovery_rate) * terms.pd * discount(terms.risk_free_rate, tau)
}

/// Spread that equates the two legs.
pub fn fair_spread(terms: &CdsTerms) -> Result<CdsQuote> {
    terms.validate()?;
    let annuity = risky_annuity(terms);
    let protection = protection_value(terms);
    let spread = protection / annuity;
    Ok(CdsQuote {
        spread_per_annum: spread,
        spread_bps: spread * 1e4,
        premium_leg_value: spread * annuity * terms.notional,
        protection_leg_value: protection * terms.notional,
    })
}

/// Prices protection on one loan: notional is the EAD and the recovery
/// rate comes from the exposure quote.
pub fn price_for_loan(
    exposure: &ExposureQuote,
    maturity_years: f64,
    risk_free_rate: f64,
) -> Result<CdsQuote> {
    fair_spread(&CdsTerms {
        notional: exposure.ead,
        maturity_years,
        risk_free_rate,
        pd: exposure.pd,
        recovery_rate: exposure.recovery_rate,
    })
}

/// [`price_for_loan`] over `(exposure, maturity)` pairs, output in input order.
pub fn price_batch(loans: &[(ExposureQuote, f64)], risk_free_rate: f64) -> Vec<Result<CdsQuote>> {
    par::map_slice(loans, |(q, t)| price_for_loan(q, *t, risk_free_rate))
}
