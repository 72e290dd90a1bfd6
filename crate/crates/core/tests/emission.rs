use nhbath::dynamics::{decay_fit_window, emitter_populations, evolve, fit_decay_rate, time_grid, DEFAULT_TOL};
use nhbath::{total_hamiltonian, Boundary, EmitterLayout, LatticeParams, Picture, SingleExcitationState};

#[test]
fn amplitude_decays_at_gamma_and_population_at_twice_gamma() {
    let g = 0.1;
    let rate = g * g / 4.0;
    let params = LatticeParams::uniform(60, 1.0, 2.0, Boundary::Open).unwrap();
    let layout = EmitterLayout::single(15, g).unwrap();
    let h = total_hamiltonian(&params, &layout, Picture::Original).unwrap();
    let psi = SingleExcitationState::excited_emitter(1, 60, 0, Picture::Original).unwrap();
    let window = decay_fit_window(rate);
    let times = time_grid(window.1, 301).unwrap();
    let traj = evolve(&h, &psi, &times, DEFAULT_TOL).unwrap();

    let population = &emitter_populations(&traj)[0];
    let amplitude: Vec<f64> = traj.states.iter().map(|s| s.emitter_amps[0].norm()).collect();
    let pop_rate = fit_decay_rate(&times, population, window).unwrap();
    let amp_rate = fit_decay_rate(&times, &amplitude, window).unwrap();
    assert!((amp_rate - rate).abs() < 0.03 * rate, "amplitude rate {amp_rate}");
    assert!((pop_rate - 2.0 * rate).abs() < 0.03 * 2.0 * rate, "population rate {pop_rate}");
}
