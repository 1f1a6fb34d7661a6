//! Endpoint velocities under the temperature flow and the Whitham coupling
//! flows, checked against a finite difference of the endpoint solution.

use cutflow::equilibrium::solve_endpoints;
use cutflow::flow::{endpoint_velocity, whitham_velocity};
use cutflow::{EndpointConfig, Potential};

fn main() -> cutflow::Result<()> {
    let pot = Potential::bleher_eynard(0.5)?;
    let t = 1.9;
    let guess = EndpointConfig::new(vec![-1.989, 0.646, 1.431, 1.870])?;
    let config = solve_endpoints(&pot, t, &guess, 1e-13)?;
    let v = endpoint_velocity(&pot, &config)?;
    let h = 1e-5;
    let up = solve_endpoints(&pot, t + h, &config, 1e-13)?;
    let down = solve_endpoints(&pot, t - h, &config, 1e-13)?;
    println!("beta         {:.10?}", config.beta());
    println!("d beta / dT  {:.10?}", v);
    let fd: Vec<f64> = up
        .beta()
        .iter()
        .zip(down.beta())
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    println!("difference   {fd:.10?}");
    for n in 1..=4 {
        println!(
            "d beta / dt_{n} {:.8?}",
            whitham_velocity(n, &pot, &config)?
        );
    }
    Ok(())
}
