//! Variable-exponent Lebesgue norms: exponent families, log-Hölder
//! certificates, quasi-norms below p = 1, and the closed-form prediction for
//! characteristic functions of balls.
//!
//! ```bash
//! cargo run --release -p vexmorrey --example lebesgue_norms
//! ```

use vexmorrey::{
    char_ball_prediction, quasi_norm, DomainMask, ExponentField, Grid, GridFunction,
};

fn main() -> vexmorrey::Result<()> {
    let grid = Grid::new(1, 1024, 64.0)?;
    println!(
        "grid: n = 1, N = {}, L = {}, h = {}",
        grid.samples_per_axis(),
        grid.half_extent(),
        grid.spacing()
    );

    // Three exponent families and their certificates.
    let constant = ExponentField::constant(grid, 2.0)?;
    let log_decay = ExponentField::log_decay(grid, 2.0, 1.0)?;
    let jump = ExponentField::jump(grid, 2.0, 4.0)?;
    for (name, p) in [("constant 2", &constant), ("2 + 1/log(e+|x|)", &log_decay), ("jump 2|4", &jump)] {
        let cert = p.log_holder_certificate(0.5)?;
        println!(
            "{name:20} p⁻ = {:.3}, p⁺ = {:.3}, p_∞ = {:.3}, c_log = {:.4}, c_∞ = {:.4} -> {}",
            p.p_minus(),
            p.p_plus(),
            p.p_infinity(),
            cert.c_log_local,
            cert.c_inf,
            if cert.passes() { "certified" } else { "rejected" }
        );
    }

    // Quasi-norm of a Gaussian under a sub-unit exponent: any power t in the
    // identity gives the same value.
    let sub_unit = ExponentField::bump(grid, 0.6, 0.8, [0.0, 0.0], 8.0)?;
    let f = GridFunction::from_real_fn(grid, |p| (-p[0] * p[0] / 8.0).exp());
    let mask = DomainMask::whole(grid);
    let norm = quasi_norm(&f, &sub_unit, &mask)?;
    println!("\nquasi-norm of a Gaussian with p⁻ = {:.2}: {norm:.6}", sub_unit.p_minus());

    // Characteristic functions of balls against the two-branch prediction.
    println!("\n  r        measured      predicted     ratio");
    for k in -4..=4 {
        let r = 2f64.powi(k);
        let ball = DomainMask::ball(grid, [0.0, 0.0], r)?;
        let measured = quasi_norm(&ball.indicator(), &log_decay, &mask)?;
        let predicted = char_ball_prediction(&log_decay, [0.0, 0.0], r);
        println!(
            "  2^{k:+2}     {measured:.6}      {predicted:.6}      {:.4}",
            measured / predicted
        );
    }
    Ok(())
}
