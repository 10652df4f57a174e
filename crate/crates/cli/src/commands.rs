use kgml::asymptotics::{
    classify, dominant_trajectory, fit_exponent, generic_trajectory, log_grid, regular_trajectory,
    widened_window, ExponentFit,
};
use kgml::kgmodels::{to_generalized_heun, to_heun, KgModel, ModelKind};
use kgml::specialfn::{heun_continued, hyp2f1, psi_ordinary};
use kgml::spectra::{energy_closed_form, solve_quantization};
use kgml::{CoulombSystem, DeformationParams, Error};
use num_complex::Complex64;

use crate::config::{RunConfig, DEFAULT_ETA};
use crate::table::{num, Table, Value};
use crate::CliError;

const UNITS: &str = "units: u = p/(mc), eta = E/(mc^2), theta = beta*(mc)^2, theta' = beta'*(mc)^2";

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn model_kind(cfg: &RunConfig) -> Result<ModelKind, CliError> {
    let name = cfg.model.as_deref().unwrap_or("ordinary");
    name.parse()
        .map_err(|_| CliError::Usage(format!("unknown model '{name}' (expected ordinary, deformed-zero-energy or deformed-first-order)")))
}

fn build_model(kind: ModelKind, cfg: &RunConfig, eta: f64) -> Result<KgModel, CliError> {
    Ok(match kind {
        ModelKind::Ordinary => KgModel::ordinary(&CoulombSystem::from_coupling(cfg.g, eta)?)?,
        ModelKind::DeformedZeroEnergy => KgModel::deformed_zero_energy(
            cfg.g,
            &DeformationParams::new(cfg.theta, cfg.theta_prime())?,
        )?,
        ModelKind::DeformedFirstOrder => {
            KgModel::deformed_first_order(&CoulombSystem::from_coupling(cfg.g, eta)?, cfg.theta)?
        }
    })
}

fn model_note(kind: ModelKind, cfg: &RunConfig, eta: f64) -> String {
    match kind {
        ModelKind::Ordinary => format!("model = ordinary, eta = {}", num(eta)),
        ModelKind::DeformedZeroEnergy => format!(
            "model = deformed-zero-energy, theta = {}, theta' = {}",
            num(cfg.theta),
            num(cfg.theta_prime())
        ),
        ModelKind::DeformedFirstOrder => {
            format!(
                "model = deformed-first-order, eta = {}, theta = {}",
                num(eta),
                num(cfg.theta)
            )
        }
    }
}

pub fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(
        "spectrum",
        &[
            "n",
            "Z",
            "g",
            "eta_closed_form",
            "eta_root",
            "relative_gap",
            "residual",
            "binding",
        ],
    );
    t.note(UNITS);
    t.note(cfg.coupling_note());
    t.note("eta_closed_form = N/sqrt(N^2 + g^2), N = n + 1/2 + mu; eta_root solves 1/2 - w + mu + n = 0");
    t.note("binding = 1 - eta_root, in units of mc^2; Z = 0 when g was given directly");
    for n in cfg.n.start..=cfg.n.end {
        let closed = energy_closed_form(cfg.g, n)?;
        let mut line = solve_quantization(cfg.g, n)?;
        line.z = cfg.z.unwrap_or(0);
        t.push(vec![
            n.into(),
            line.z.into(),
            line.g.into(),
            closed.into(),
            line.eta.into(),
            ((line.eta - closed).abs() / closed).into(),
            line.residual.into(),
            line.binding().into(),
        ]);
    }
    Ok(t)
}

pub fn exponents(cfg: &RunConfig) -> Result<Table, CliError> {
    let kind = model_kind(cfg)?;
    let eta = cfg.eta.unwrap_or(DEFAULT_ETA);
    let model = build_model(kind, cfg, eta)?;
    let exps = model.psi_exponents_at_infinity()?;
    let window = widened_window(cfg.window, exps);

    let mut t = Table::new(
        "exponents",
        &[
            "branch",
            "exponent_re",
            "exponent_im",
            "fitted",
            "stderr",
            "deviation",
            "oscillatory",
        ],
    );
    t.note(UNITS);
    t.note(cfg.coupling_note());
    t.note(model_note(kind, cfg, eta));
    t.note(format!(
        "psi ~ u^rho as u -> infinity; fit window u in [{}, {}]",
        num(window.0),
        num(window.1)
    ));
    if window != cfg.window {
        t.note("complex exponent pair: window widened to two oscillation periods in ln u");
    }
    t.note("subdominant: generic solution (slower decay); dominant: Frobenius branch at infinity (faster decay)");
    let verdict = match kind {
        ModelKind::Ordinary => Some(classify(cfg.g, None)?),
        ModelKind::DeformedZeroEnergy => Some(classify(
            cfg.g,
            Some(&DeformationParams::new(cfg.theta, cfg.theta_prime())?),
        )?),
        ModelKind::DeformedFirstOrder => None,
    };
    if let Some(v) = verdict {
        t.note(format!(
            "regime = {}, conclusion = {}, coupling dependent = {}",
            v.regime.name(),
            v.conclusion.name(),
            v.z_dependent
        ));
    }

    let fit_or_flag = |r: kgml::Result<ExponentFit>| -> Result<Option<ExponentFit>, CliError> {
        match r {
            Ok(f) => Ok(Some(f)),
            Err(Error::Oscillatory { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    let sub = fit_or_flag(fit_exponent(
        &generic_trajectory(&model, window, cfg.tol)?,
        window,
    ))?;
    let dom = fit_or_flag(fit_exponent(
        &dominant_trajectory(&model, window, cfg.order, cfg.tol)?,
        window,
    ))?;
    for (name, rho, fit) in [("subdominant", exps[0], sub), ("dominant", exps[1], dom)] {
        let (fitted, stderr, dev) = match fit {
            Some(f) => (
                f.exponent.into(),
                f.stderr.into(),
                ((f.exponent - rho.re).abs() / rho.re.abs()).into(),
            ),
            None => (Value::Missing, Value::Missing, Value::Missing),
        };
        t.push(vec![
            name.into(),
            rho.re.into(),
            rho.im.into(),
            fitted,
            stderr,
            dev,
            fit.is_none().into(),
        ]);
    }
    Ok(t)
}

pub fn wavefunction(cfg: &RunConfig) -> Result<Table, CliError> {
    let kind = model_kind(cfg)?;
    let grid = log_grid(cfg.u_min, cfg.u_max, cfg.points)?;
    let mut t = Table::new("wavefunction", &["u", "re_psi", "im_psi", "abs_psi"]);
    t.note(UNITS);
    t.note(cfg.coupling_note());
    let psi: Vec<Complex64> = match kind {
        ModelKind::Ordinary => {
            let eta = match cfg.eta {
                Some(e) => e,
                None => energy_closed_form(cfg.g, cfg.n.start)?,
            };
            t.note(model_note(kind, cfg, eta));
            t.note("psi = u^-1 (1 + iu/eps)^(-3/2-mu) 2F1(3/2+mu, 1/2-w+mu; 2mu+1; 2/(1 + iu/eps)), eps = sqrt(1 - eta^2)");
            if cfg.eta.is_none() {
                t.note(format!("eta is the n = {} bound-state energy", cfg.n.start));
            }
            let s = CoulombSystem::from_coupling(cfg.g, eta)?;
            grid.iter()
                .map(|&u| psi_ordinary(&s, u))
                .collect::<kgml::Result<_>>()?
        }
        ModelKind::DeformedZeroEnergy => {
            let red = to_heun(
                cfg.g,
                &DeformationParams::new(cfg.theta, cfg.theta_prime())?,
            )?;
            t.note(model_note(kind, cfg, 0.0));
            t.note("psi = (1 - xi) H(xi0, q; a, b, c, d; xi), xi = s u^2/(1 + s u^2), s = theta + theta'");
            grid.iter()
                .map(|&u| Ok(red.map.gauge(u) * heun_continued(&red.params, c(red.map.xi(u)))?.w))
                .collect::<kgml::Result<_>>()?
        }
        ModelKind::DeformedFirstOrder => {
            let eta = cfg.eta.unwrap_or(DEFAULT_ETA);
            t.note(model_note(kind, cfg, eta));
            t.note("psi is the solution regular at u = 0, seeded from its series and integrated numerically");
            let model = build_model(kind, cfg, eta)?;
            regular_trajectory(&model, &grid, cfg.order, cfg.tol)?.psi
        }
    };
    t.note("normalization: unit amplitude of the closed form or series (A = 1)");
    for (u, p) in grid.iter().zip(psi) {
        t.push(vec![(*u).into(), p.re.into(), p.im.into(), p.norm().into()]);
    }
    Ok(t)
}

pub fn params(cfg: &RunConfig) -> Result<(Table, Vec<String>), CliError> {
    let name = cfg.model.as_deref().unwrap_or("heun");
    let mut t = Table::new("params", &["symbol", "re", "im"]);
    t.note(UNITS);
    t.note(cfg.coupling_note());
    let cplx = |s: &str, z: Complex64| vec![s.into(), z.re.into(), z.im.into()];
    let real = |s: &str, x: f64| vec![s.into(), x.into(), 0.0.into()];
    let mut warnings = Vec::new();
    match name {
        "heun" => {
            let red = to_heun(
                cfg.g,
                &DeformationParams::new(cfg.theta, cfg.theta_prime())?,
            )?;
            t.note(format!(
                "heun block: theta = {}, theta' = {}",
                num(cfg.theta),
                num(cfg.theta_prime())
            ));
            t.note("omega1 = theta/(theta + theta'), omega2 = (theta + theta')/2, k = g^2/4");
            let p = &red.params;
            t.push(real("omega1", red.omega1));
            t.push(real("omega2", red.omega2));
            t.push(real("k", red.k));
            t.push(cplx("nu", red.nu));
            t.push(cplx("xi0", p.xi0));
            t.push(cplx("q", p.q));
            for (s, v) in [("a", p.a), ("b", p.b), ("c", p.c), ("d", p.d), ("e", p.e)] {
                t.push(cplx(s, v));
            }
            t.push(real("fuchsian_residual", p.fuchs_residual()));
        }
        "generalized-heun" => {
            let eta = cfg.eta.unwrap_or(DEFAULT_ETA);
            let s = CoulombSystem::from_coupling(cfg.g, eta)?;
            let red = to_generalized_heun(&s, cfg.theta)?;
            t.note(format!(
                "generalized heun block: eta = {}, theta = {}",
                num(eta),
                num(cfg.theta)
            ));
            t.note("x = (1 - i sqrt(6 theta) u)/2");
            let p = &red.params;
            t.push(real("sqrt_6theta", red.map.sqrt_6theta));
            for (s, v) in [
                ("a", p.a),
                ("b", p.b),
                ("rho1", p.rho1),
                ("rho2", p.rho2),
                ("c", p.c),
                ("d", p.d),
                ("e", p.e),
                ("f", p.f),
                ("x1", p.x1),
                ("x2", p.x2),
            ] {
                t.push(cplx(s, v));
            }
            t.push(real("fuchsian_residual", p.fuchs_residual()));
            for w in &red.warnings {
                t.note(format!("warning: {w}"));
            }
            warnings = red.warnings;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown parameter block '{other}' (expected heun or generalized-heun)"
            )))
        }
    }
    Ok((t, warnings))
}

/// Heun solution against its hypergeometric reduction at `θ = θ′`, on a
/// uniform grid `ξ ∈ [0, 0.4]`.
pub fn heun_check(cfg: &RunConfig) -> Result<Table, CliError> {
    if let Some(tp) = cfg.theta_prime {
        if tp != cfg.theta {
            return Err(CliError::Usage(format!(
                "heun-check compares the theta = theta' case; got theta = {}, theta' = {tp}",
                cfg.theta
            )));
        }
    }
    let red = to_heun(cfg.g, &DeformationParams::new(cfg.theta, cfg.theta)?)?;
    let (a, b, cc) = (1.25 - red.nu / 2.0, 1.25 + red.nu / 2.0, c(1.5));
    let mut t = Table::new(
        "heun-check",
        &[
            "xi",
            "re_heun",
            "im_heun",
            "re_hyp",
            "im_hyp",
            "relative_gap",
        ],
    );
    t.note(UNITS);
    t.note(cfg.coupling_note());
    t.note(format!(
        "theta = theta' = {}, xi0 = {}",
        num(cfg.theta),
        num(red.params.xi0.re)
    ));
    t.note("heun: (1 - xi) H(xi0, q; a, b, c, d; xi); hyp: (1 - xi) 2F1(5/4 - nu/2, 5/4 + nu/2; 3/2; xi/xi0)");
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for i in 0..cfg.points {
        let xi = 0.4 * i as f64 / (cfg.points - 1) as f64;
        let h = (1.0 - xi) * heun_continued(&red.params, c(xi))?.w;
        let f = (1.0 - xi) * hyp2f1(a, b, cc, c(xi) / red.params.xi0)?;
        let gap = (h - f).norm() / f.norm();
        worst = worst.max(gap);
        rows.push(vec![
            xi.into(),
            h.re.into(),
            h.im.into(),
            f.re.into(),
            f.im.into(),
            gap.into(),
        ]);
    }
    t.note(format!("max relative gap = {}", num(worst)));
    for r in rows {
        t.push(r);
    }
    Ok(t)
}
