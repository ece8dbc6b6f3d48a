//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Each criterion compares the implementation against an independent oracle
//! (a hand-coded filter, corner enumeration, tabular backward induction,
//! closed-form capture times, rollouts, distribution tests).

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pursuit_core::dynamics::{AgentState, ControlBounds, ControlInput, RelativeState, DEFAULT_DT};
use pursuit_core::episode::{run_episode, save_trajectory_csv, EpisodeConfig, EpisodeResult};
use pursuit_core::evader::{spawn_evader, DubinsPolicy, EvaderPolicySpec, SpawnConfig};
use pursuit_core::harness::eval_sweep;
use pursuit_core::hji::{
    corner_controls, discrete_game_oracle, hamiltonian, solve_hji, Costate, Grid3D, SolverOptions, CAPTURE_RADIUS,
};
use pursuit_core::perception::{kf_predict, kf_update, Detection, FilterParams, KalmanState};
use pursuit_core::pursuer::{PursuerPolicySpec, DEFAULT_LOOKAHEAD_STEPS};
use pursuit_core::rng::stream;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- A1

fn a1_constants() -> Outcome {
    let mut bad = Vec::new();
    let mut expect = |name: &str, ok: bool| {
        if !ok {
            bad.push(name.to_string());
        }
    };
    let p = ControlBounds::PURSUER;
    let e = ControlBounds::EVADER;
    expect("pursuer bounds", (p.v_min, p.v_max, p.omega_min, p.omega_max) == (0.0, 3.0, -2.0, 2.0));
    expect("evader bounds", (e.v_min, e.v_max, e.omega_min, e.omega_max) == (0.0, 2.5, -2.0, 2.0));
    expect("capture radius", CAPTURE_RADIUS == 0.8);
    let cfg = EpisodeConfig::default();
    expect("episode defaults", cfg.horizon == 20.0 && cfg.dt == 0.2 && cfg.capture_radius == 0.8);
    expect("dt", DEFAULT_DT == 0.2);
    expect("lookahead steps", DEFAULT_LOOKAHEAD_STEPS == 8);
    expect(
        "lookahead spec",
        PursuerPolicySpec::lookahead() == PursuerPolicySpec::Lookahead { steps: 8, gain: 3.0 },
    );
    let f = FilterParams::default();
    let diag = |a: f64, b: f64, c: f64| Matrix3::from_diagonal(&Vector3::new(a, b, c));
    expect("Q", f.q == diag(0.01, 0.01, 0.01));
    expect("R", f.r == diag(0.2, 0.2, 0.1));
    expect("P0", f.p0 == Matrix3::identity());
    expect("A", f.a == Matrix3::identity());
    expect("H", f.h == Matrix3::identity());
    expect("B", f.b == diag(-0.2, -0.2, 0.2));
    expect("filter initial", KalmanState::initial(&f).cov == Matrix3::identity());
    check(bad.is_empty(), if bad.is_empty() { "all defaults exact".into() } else { format!("mismatched: {bad:?}") })
}

// ---------------------------------------------------------------- A2

/// Plain-array textbook Kalman filter used as the oracle.
mod textbook {
    pub type M = [[f64; 3]; 3];
    pub type V = [f64; 3];

    pub fn mul(a: &M, b: &M) -> M {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    pub fn mv(a: &M, v: &V) -> V {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for k in 0..3 {
                out[i] += a[i][k] * v[k];
            }
        }
        out
    }

    pub fn t(a: &M) -> M {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = a[j][i];
            }
        }
        c
    }

    pub fn add(a: &M, b: &M) -> M {
        let mut c = *a;
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += b[i][j];
            }
        }
        c
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inv(a: &M) -> M {
        let mut m = *a;
        let mut r = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for col in 0..3 {
            let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
            m.swap(col, piv);
            r.swap(col, piv);
            let d = m[col][col];
            for j in 0..3 {
                m[col][j] /= d;
                r[col][j] /= d;
            }
            for i in 0..3 {
                if i != col {
                    let f = m[i][col];
                    for j in 0..3 {
                        m[i][j] -= f * m[col][j];
                        r[i][j] -= f * r[col][j];
                    }
                }
            }
        }
        r
    }

    pub fn wrap(a: f64) -> f64 {
        let w = (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        if w >= std::f64::consts::PI {
            -std::f64::consts::PI
        } else {
            w
        }
    }

    pub struct Kf {
        pub a: M,
        pub b: M,
        pub h: M,
        pub q: M,
        pub r: M,
        pub x: V,
        pub p: M,
    }

    impl Kf {
        pub fn predict(&mut self, u: &V) {
            let ax = mv(&self.a, &self.x);
            let bu = mv(&self.b, u);
            self.x = [ax[0] + bu[0], ax[1] + bu[1], wrap(ax[2] + bu[2])];
            self.p = add(&mul(&mul(&self.a, &self.p), &t(&self.a)), &self.q);
        }

        pub fn update(&mut self, y: &V) {
            let hx = mv(&self.h, &self.x);
            let nu = [y[0] - hx[0], y[1] - hx[1], wrap(y[2] - hx[2])];
            let s = add(&mul(&mul(&self.h, &self.p), &t(&self.h)), &self.r);
            let k = mul(&mul(&self.p, &t(&self.h)), &inv(&s));
            let kn = mv(&k, &nu);
            self.x = [self.x[0] + kn[0], self.x[1] + kn[1], wrap(self.x[2] + kn[2])];
            let kh = mul(&k, &self.h);
            let mut ikh = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    ikh[i][j] = if i == j { 1.0 } else { 0.0 } - kh[i][j];
                }
            }
            self.p = mul(&ikh, &self.p);
        }
    }
}

fn to_arr(m: &Matrix3<f64>) -> textbook::M {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = m[(i, j)];
        }
    }
    a
}

fn a2_kalman() -> Outcome {
    let params = FilterParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    // 100-step rollouts against the textbook filter
    for _ in 0..20 {
        let mut ours = KalmanState::initial(&params);
        let mut oracle = textbook::Kf {
            a: to_arr(&params.a),
            b: to_arr(&params.b),
            h: to_arr(&params.h),
            q: to_arr(&params.q),
            r: to_arr(&params.r),
            x: [0.0; 3],
            p: to_arr(&params.p0),
        };
        for _ in 0..100 {
            let u = ControlInput::new(rng.random_range(0.0..3.0), rng.random_range(-2.0..2.0));
            let uf = u.as_filter_input();
            ours = kf_predict(&ours, &uf, &params);
            oracle.predict(&uf);
            if rng.random_bool(0.7) {
                let y = RelativeState::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0), rng.random_range(-PI..PI));
                ours = kf_update(&ours, &Detection { measurement: y }, &params).map_err(|e| e.to_string())?;
                oracle.update(&y.as_array());
            }
            let m = ours.mean.as_array();
            for i in 0..3 {
                let d = if i == 2 { textbook::wrap(m[i] - oracle.x[i]).abs() } else { (m[i] - oracle.x[i]).abs() };
                worst = worst.max(d);
                for j in 0..3 {
                    worst = worst.max((ours.cov[(i, j)] - oracle.p[i][j]).abs());
                }
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("max component deviation {worst:.3e} > 1e-10"));
    }

    // SPD and Loewner contraction on 10³ random sequences
    let mut min_eig = f64::INFINITY;
    let mut min_contraction = f64::INFINITY;
    for _ in 0..1000 {
        let mut k = KalmanState::initial(&params);
        for _ in 0..20 {
            k = kf_predict(&k, &[rng.random_range(0.0..3.0), 0.0, rng.random_range(-2.0..2.0)], &params);
            if rng.random_bool(0.5) {
                let y = RelativeState::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0), rng.random_range(-PI..PI));
                let post = kf_update(&k, &Detection { measurement: y }, &params).map_err(|e| e.to_string())?;
                let drop = SymmetricEigen::new(k.cov - post.cov).eigenvalues.min();
                min_contraction = min_contraction.min(drop);
                k = post;
            }
            min_eig = min_eig.min(SymmetricEigen::new(k.cov).eigenvalues.min());
        }
    }
    check(
        min_eig > 0.0 && min_contraction > -1e-12,
        format!("max deviation {worst:.2e}; min eigenvalue {min_eig:.3e}; min λ(P⁻−P⁺) {min_contraction:.2e}"),
    )
}

// ---------------------------------------------------------------- A3

fn a3_hamiltonian() -> Outcome {
    let bp = ControlBounds::PURSUER;
    let be = ControlBounds::EVADER;
    let cp = corner_controls(&bp);
    let ce = corner_controls(&be);
    let f = |x: &RelativeState, p: &Costate, up: &ControlInput, ue: &ControlInput| {
        let dpx = -up.v + ue.v * x.theta_rel.cos() + up.omega * x.py_rel;
        let dpy = ue.v * x.theta_rel.sin() - up.omega * x.px_rel;
        let dth = ue.omega - up.omega;
        p.p1 * dpx + p.p2 * dpy + p.p3 * dth
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut worst_isaacs) = (0.0f64, 0.0f64);
    for _ in 0..100_000 {
        let x = RelativeState::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0), rng.random_range(-PI..PI));
        let p = Costate::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let minmax = cp
            .iter()
            .map(|up| ce.iter().map(|ue| f(&x, &p, up, ue)).fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min);
        let maxmin = ce
            .iter()
            .map(|ue| cp.iter().map(|up| f(&x, &p, up, ue)).fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        let h = hamiltonian(&x, &p, &bp, &be);
        worst = worst.max((h.value - minmax).abs());
        worst = worst.max((f(&x, &p, &h.pursuer, &h.evader) - minmax).abs());
        worst_isaacs = worst_isaacs.max((minmax - maxmin).abs());
    }
    check(
        worst <= 1e-12 && worst_isaacs <= 1e-12,
        format!("10⁵ pairs: |H − brute force| ≤ {worst:.2e}, |minmax − maxmin| ≤ {worst_isaacs:.2e}"),
    )
}

// ---------------------------------------------------------------- A4

fn a4_oracle_agreement() -> Outcome {
    let bp = ControlBounds::PURSUER;
    let be = ControlBounds::EVADER;
    let grid = Grid3D::square(3.0, 21, 13);
    let horizon = 3.0;
    let step = 0.2;
    let v = solve_hji(&grid, &bp, &be, horizon, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let steps = (horizon / step).round() as usize;
    let oracle = discrete_game_oracle(&grid, &corner_controls(&bp), &corner_controls(&be), steps, step, CAPTURE_RADIUS)
        .map_err(|e| e.to_string())?;
    let last = v.slice(v.slices() - 1);
    let table = oracle.final_table();
    let nt = grid.n_theta;
    let (mut agree, mut total, mut pde_in, mut oracle_in) = (0usize, 0usize, 0usize, 0usize);
    for idx in 0..grid.len() {
        let (ix, iy, it) = grid.unravel(idx);
        if grid.on_boundary(ix, iy) {
            continue;
        }
        let inside = last[idx] <= 0.0;
        let neighbours = [
            grid.index(ix - 1, iy, it),
            grid.index(ix + 1, iy, it),
            grid.index(ix, iy - 1, it),
            grid.index(ix, iy + 1, it),
            grid.index(ix, iy, (it + 1) % nt),
            grid.index(ix, iy, (it + nt - 1) % nt),
        ];
        // at least one cell away from the zero level set
        if neighbours.iter().any(|&j| (last[j] <= 0.0) != inside) {
            continue;
        }
        total += 1;
        agree += usize::from(inside == table[idx]);
        pde_in += usize::from(inside);
        oracle_in += usize::from(table[idx]);
    }
    let frac = agree as f64 / total as f64;
    check(
        frac >= 0.90,
        format!(
            "sign agreement {frac:.3} on {total} interior nodes (captured: PDE {pde_in}, oracle {oracle_in}; {steps} steps of {step} s)"
        ),
    )
}

// ---------------------------------------------------------------- A5

fn a5_rollouts() -> Outcome {
    let bp = ControlBounds::PURSUER;
    let be = ControlBounds::EVADER;
    let half = 5.0;
    let max_s = 4.0;
    let v = Arc::new(
        solve_hji(&Grid3D::square(half, 121, 41), &bp, &be, max_s, &SolverOptions::default()).map_err(|e| e.to_string())?,
    );
    let per_side = 200;
    let dt = DEFAULT_DT;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cap_ok, mut cap_n, mut sur_ok, mut sur_n) = (0, 0, 0, 0);
    let run = |x: &RelativeState, horizon: f64| -> Result<EpisodeResult, String> {
        let cfg = EpisodeConfig {
            horizon,
            initial_evader: Some(AgentState::new(x.px_rel, x.py_rel, x.theta_rel)),
            ..EpisodeConfig::default()
        };
        run_episode(&PursuerPolicySpec::Game, &EvaderPolicySpec::Game, &cfg, Some(&v)).map_err(|e| e.to_string())
    };
    let mut draws = 0;
    while cap_n < per_side || sur_n < per_side {
        draws += 1;
        if draws > 1_000_000 {
            return Err("could not sample enough states".into());
        }
        let r = rng.random_range(CAPTURE_RADIUS..half - 1.0);
        let a = rng.random_range(-PI..PI);
        let x = RelativeState::new(r * a.cos(), r * a.sin(), rng.random_range(-PI..PI));
        let s = dt * rng.random_range(5..=20) as f64;
        let value = v.value(&x, s).map_err(|e| e.to_string())?;
        if value <= -0.1 && cap_n < per_side {
            let budget = 1.25 * s + 0.4;
            let res = run(&x, (budget / dt).ceil() * dt)?;
            cap_n += 1;
            cap_ok += usize::from(res.time_to_capture.is_some_and(|t| t <= budget + 1e-9));
        } else if value >= 0.1 && sur_n < per_side {
            let res = run(&x, (s / dt).ceil() * dt)?;
            sur_n += 1;
            sur_ok += usize::from(!res.captured);
        }
    }
    let cap = cap_ok as f64 / cap_n as f64;
    let sur = sur_ok as f64 / sur_n as f64;
    check(
        cap >= 0.95 && sur >= 0.95,
        format!("capture within 1.25·s + 0.4: {cap_ok}/{cap_n} ({cap:.3}); evader survives s: {sur_ok}/{sur_n} ({sur:.3})"),
    )
}

// ---------------------------------------------------------------- A6

fn a6_closed_forms() -> Outcome {
    let aligned = |gap: f64| EpisodeConfig {
        initial_evader: Some(AgentState::new(gap, 0.0, 0.0)),
        ..EpisodeConfig::default()
    };
    let straight = run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Straight, &aligned(2.0), None)
        .map_err(|e| e.to_string())?;
    let expected = (2.0 - 0.8) / (3.0 - 2.5);
    let t_straight = straight.time_to_capture.ok_or("straight evader not captured")?;

    let immobile_cfg = EpisodeConfig {
        evader_bounds: ControlBounds {
            v_max: 0.0,
            ..ControlBounds::EVADER
        },
        ..aligned(5.0)
    };
    let immobile = run_episode(&PursuerPolicySpec::reactive(), &EvaderPolicySpec::Straight, &immobile_cfg, None)
        .map_err(|e| e.to_string())?;
    let ticks = immobile.trajectory.len() - 1;
    let expected_ticks = ((5.0f64 - 0.8) / 3.0 / 0.2).ceil() as usize;
    check(
        (t_straight - expected).abs() <= 0.2 + 1e-9 && immobile.captured && ticks == expected_ticks,
        format!("straight: {t_straight:.2} s (expected {expected:.2} ± 0.2); immobile: {ticks} ticks (expected {expected_ticks})"),
    )
}

// ---------------------------------------------------------------- A7

fn a7_lookahead_vs_reactive() -> Outcome {
    let cfg = EpisodeConfig::default();
    let sweep = |pp: PursuerPolicySpec| {
        eval_sweep(&pp, &EvaderPolicySpec::Dubins, &cfg, 500, None, None).map_err(|e| e.to_string())
    };
    let reactive = sweep(PursuerPolicySpec::reactive())?;
    let lookahead = sweep(PursuerPolicySpec::lookahead())?;
    // survivals count as the full horizon so neither median ignores misses
    let (r, l) = (reactive.censored_median_t_capture(), lookahead.censored_median_t_capture());
    let ratio = l / r;
    check(
        ratio <= 0.5,
        format!(
            "median time-to-capture lookahead {l:.2} s vs reactive {r:.2} s, ratio {ratio:.3} (capture rates {:.3} / {:.3})",
            lookahead.capture_frequency(),
            reactive.capture_frequency()
        ),
    )
}

// ---------------------------------------------------------------- A8

fn a8_protocol() -> Outcome {
    // byte-identical trajectories
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = EpisodeConfig::default().with_seed(7);
    let mut files = Vec::new();
    for i in 0..2 {
        let r = run_episode(&PursuerPolicySpec::search_track(), &EvaderPolicySpec::Random, &cfg, None)
            .map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("run{i}.csv"));
        save_trajectory_csv(&r.trajectory, &path).map_err(|e| e.to_string())?;
        files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    if files[0] != files[1] {
        return Err("trajectory CSVs differ between identical runs".into());
    }

    // worker-count independence
    let sweep = |workers| {
        eval_sweep(&PursuerPolicySpec::lookahead(), &EvaderPolicySpec::Random, &EpisodeConfig::default(), 64, None, Some(workers))
            .map_err(|e| e.to_string())
    };
    if sweep(1)? != sweep(4)? {
        return Err("sweep output depends on the worker count".into());
    }

    // 70/30 turn-direction switching
    let mut dubins = DubinsPolicy::new(stream(8, 2));
    let n = 10_000;
    let mut prev = dubins.begin_turn();
    let mut flips = 0;
    for _ in 0..n {
        let next = dubins.begin_turn();
        flips += usize::from(next != prev);
        prev = next;
    }
    let flip_rate = flips as f64 / n as f64;
    if (flip_rate - 0.7).abs() > 0.02 {
        return Err(format!("turn flip rate {flip_rate:.4} outside 0.7 ± 0.02"));
    }

    // spawn radius ~ U[2, 6]: Kolmogorov-Smirnov at the 1% level
    let mut rng = stream(9, 0);
    let origin = AgentState::new(0.0, 0.0, 0.0);
    let spawn = SpawnConfig::default();
    let mut radii: Vec<f64> = (0..10_000)
        .map(|_| {
            let e = spawn_evader(&origin, &spawn, &mut rng);
            e.px.hypot(e.py)
        })
        .collect();
    radii.sort_by(f64::total_cmp);
    let m = radii.len() as f64;
    let ks = radii
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let cdf = ((r - 2.0) / 4.0).clamp(0.0, 1.0);
            ((i + 1) as f64 / m - cdf).abs().max((cdf - i as f64 / m).abs())
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / m.sqrt();
    check(
        ks < critical,
        format!("CSVs identical; workers 1 ≡ 4; flip rate {flip_rate:.4}; KS D = {ks:.4} < {critical:.4}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 8] = [
        ("A1", "constants fidelity", a1_constants),
        ("A2", "Kalman oracle equivalence", a2_kalman),
        ("A3", "Hamiltonian exactness", a3_hamiltonian),
        ("A4", "HJI vs discrete-game oracle", a4_oracle_agreement),
        ("A5", "game-value rollout soundness", a5_rollouts),
        ("A6", "closed-form capture times", a6_closed_forms),
        ("A7", "lookahead vs reactive vs Dubins", a7_lookahead_vs_reactive),
        ("A8", "protocol and determinism", a8_protocol),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS  {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL  {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
