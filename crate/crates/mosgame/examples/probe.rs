use mosgame::scenarios::*;
use mosgame::*;

fn main() {
    let mut handles = Vec::new();
    for n in [1.4, 1.75, 2.1, 2.45, 2.8] {
        for q in [0.15, 0.4, 0.65, 0.9] {
            handles.push(std::thread::spawn(move || {
                let mut p = fig4_params(1.4, 9000.0, 1.0);
                p.entomology.b = p.entomology.egg_rate_for_offspring_number(n);
                let (lo, hi) = {
                    let pv = p.validated().unwrap();
                    e05_existence_interval(&pv).unwrap()
                };
                let x = lo * (hi / lo).powf(q);
                p.behavior.r_c = x;
                let p = p.validated().unwrap();
                let mut cfg = IntegratorConfig {
                    rel_tol: 1e-6,
                    abs_tol: [2.0, 2.0, 1e-8],
                    ..IntegratorConfig::for_params(&p)
                };
                cfg.max_steps = 50_000_000;
                let traj = integrate(&p, State::new(2.0e4, 2.0e4, 0.3), (0.0, 6000.0), &cfg).unwrap();
                let eqs = enumerate_equilibria(&p);
                let out = detect_attractor(&traj, &eqs.equilibria, &p, &AnalysisConfig::default()).unwrap();
                let desc = oscillation_metrics(&traj, 0.5, &p, &AnalysisConfig::default())
                    .map(|m| format!("T={:.1} jit={:.3} amp={:.2e}", m.aquatic.period, m.aquatic.period_jitter, m.aquatic.amplitude))
                    .unwrap_or_else(|e| format!("({e})"));
                format!("N={n:.2} q={q:.2} x={x:.0}: {:?} {desc} steps={}", out.kind, traj.stats.accepted)
            }));
        }
    }
    for h in handles {
        println!("{}", h.join().unwrap());
    }
}
