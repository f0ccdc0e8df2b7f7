//! Gaussian expectations with the three integration rules, and the closed-form
//! inner moments checked against brute-force quadrature.

use capacity_lab::gaussian::{inner_moments_h, inner_moments_h_quad, inner_moments_xi, inner_moments_xi_quad};
use capacity_lab::gaussian::{AdaptiveRule, QuadratureGrid};

fn main() -> capacity_lab::Result<()> {
    let composite = QuadratureGrid::default();
    let hermite = QuadratureGrid::hermite(200)?;
    let adaptive = AdaptiveRule::default();

    // E[z^4] = 3, and a kinked integrand E[max(z, 0)] = 1/sqrt(2π)
    println!("E[z^4]      composite {:.15}  hermite {:.15}", composite.expect(|z| z.powi(4)), hermite.expect(|z| z.powi(4)));
    let relu = |z: f64| z.max(0.0);
    println!(
        "E[max(z,0)] composite {:.15}  hermite {:.15}  adaptive {:.15}  exact {:.15}",
        composite.expect(relu),
        hermite.expect(relu),
        adaptive.expect(relu, &[0.0]),
        1.0 / (2.0 * std::f64::consts::PI).sqrt()
    );

    let fine = QuadratureGrid::hermite(400)?;
    let h = inner_moments_h(0.7, 0.2, 0.5, 0.3)?;
    let hq = inner_moments_h_quad(0.7, 0.2, 0.5, 0.3, &fine)?;
    println!("H moments  closed {:.12e} {:.12e} {:.12e}", h.i0, h.i1, h.i2);
    println!("           quad   {:.12e} {:.12e} {:.12e}", hq.i0, hq.i1, hq.i2);

    let x = inner_moments_xi(0.5, 2.0, 1.0, 4.0)?;
    let xq = inner_moments_xi_quad(0.5, 2.0, 1.0, 4.0, &fine)?;
    println!("Xi moments closed {:.12e} {:.12e} {:.12e}", x.j0, x.j1, x.j2);
    println!("           quad   {:.12e} {:.12e} {:.12e}", xq.j0, xq.j1, xq.j2);
    Ok(())
}
