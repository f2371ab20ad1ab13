use std::path::Path;

use super::AnnualSolution;
use crate::{Error, Result};

/// `year,tech,capacity_mw,generation_mwh,lambda,mu,omega,sigma,gamma,nu`
pub fn write_annual_csv(sol: &AnnualSolution, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "year",
        "tech",
        "capacity_mw",
        "generation_mwh",
        "lambda",
        "mu",
        "omega",
        "sigma",
        "gamma",
        "nu",
    ])?;
    for (yi, yr) in sol.years.iter().enumerate() {
        for c in sol.year_cells(yi) {
            w.write_record([
                yr.year.to_string(),
                c.tech.clone(),
                c.capacity.to_string(),
                c.generation.to_string(),
                yr.lambda.to_string(),
                c.mu.to_string(),
                c.omega.to_string(),
                c.sigma.to_string(),
                c.gamma.to_string(),
                yr.nu.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
