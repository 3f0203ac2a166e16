//! Group comparison statistics: Welch's t-test, Cohen's D and Spearman's rho.

use dpi::stats::{cohens_d, spearman_rho, welch_t_test};

fn main() -> dpi::Result<()> {
    let field = [0.80, 0.70, 0.75, 0.85, 0.65, 0.80, 0.70, 0.90, 0.75, 0.70];
    let lab = [0.55, 0.60, 0.50, 0.70, 0.45, 0.65, 0.60, 0.55, 0.50, 0.65];
    let t = welch_t_test(&field, &lab)?;
    println!("Welch t = {:.3}, df = {:.2}, p = {:.2e} (one-sided {:.2e})", t.t, t.df, t.p, t.p_greater());
    println!("Cohen's D = {:.3}", cohens_d(&field, &lab)?);

    let days = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
    let acc = [0.66, 0.68, 0.70, 0.69, 0.72, 0.71, 0.72, 0.74];
    let r = spearman_rho(&days, &acc)?;
    println!("Spearman rho = {:.3}, p = {:.3e} (n = {})", r.rho, r.p, r.n);
    Ok(())
}
