//! NSAM -> SPL calibration, and why the skewness feature does not need it:
//! skewness is unchanged by any increasing linear map.

use dpi::features::skewness;
use dpi::signal::{apply_calibration, fit_calibration};
use dpi::synth::gen_calibration_pairs;

fn main() -> dpi::Result<()> {
    let pairs = gen_calibration_pairs(1.2, 110.0, 1.0, 200, 3)?;
    let model = fit_calibration(&pairs)?;
    println!("fit: spl = {:.4} * nsam + {:.4} (residual rms {:.3} dB)", model.slope, model.intercept, model.residual_rms);
    println!("nsam -30 dB -> {:.2} dB SPL", apply_calibration(&model, -30.0));

    let nsam: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let spl: Vec<f64> = nsam.iter().map(|&x| apply_calibration(&model, x)).collect();
    println!("skewness nsam {:.12}  spl {:.12}", skewness(&nsam)?, skewness(&spl)?);
    Ok(())
}
