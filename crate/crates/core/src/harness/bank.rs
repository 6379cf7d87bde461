use crate::analysis::undesired_init;
use crate::attitude::{AttitudeEstimator, AttitudeGains, AttitudeObserver, MartinAttitude, TiltStage};
use crate::error::{Error, Result};
use crate::measurement::{ImuSample, TrueState};
use crate::ode::Hold;
use crate::so3::{Rotation, UnitVec3, Vec3, E_Z};
use crate::tilt::{
    HuaGains, HuaObserver, MartinGains, MartinTilt, OneStepGains, OneStepObserver, TiltEstimator, TwoStepGains,
    TwoStepObserver,
};

use super::config::{EstimatorConfig, EstimatorKind, InitPolicy, StageConfig, TiltOutput, TwoStepConfig};

/// Everything needed to initialize an estimator at `t = 0`.
#[derive(Clone, Copy, Debug)]
pub struct InitContext<'a> {
    pub truth: &'a TrueState,
    pub y0: &'a ImuSample,
    pub m: UnitVec3,
    pub g0: f64,
    pub policy: &'a InitPolicy,
}

impl InitContext<'_> {
    fn at_truth(&self) -> bool {
        matches!(self.policy, InitPolicy::Truth)
    }

    /// Initial attitude estimate implied by the policy.
    pub fn rhat0(&self) -> Result<Rotation> {
        match self.policy {
            InitPolicy::Truth => Ok(self.truth.r),
            InitPolicy::UndesiredEquilibrium => Ok(undesired_init(&self.m)?.transpose().compose(&self.truth.r)),
            InitPolicy::Explicit(r) => Rotation::from_matrix(*Rotation::from_row_major_unchecked(r).matrix()),
        }
    }

    fn tilt0(&self) -> Result<UnitVec3> {
        Ok(UnitVec3::new_unchecked(self.rhat0()?.inverse_apply(&E_Z)))
    }
}

pub(crate) fn two_step_gains(c: &TwoStepConfig, g0: f64) -> Result<TwoStepGains> {
    match &c.alphas {
        Some(a) if a.len() != c.order => {
            Err(Error::Config(format!("order {} but {} gains given", c.order, a.len())))
        }
        Some(a) => TwoStepGains::new(a.clone(), c.gamma),
        None => TwoStepGains::binomial(c.order, c.gamma, g0),
    }
}

fn two_step(c: &TwoStepConfig, ctx: &InitContext<'_>) -> Result<TwoStepObserver> {
    let gains = two_step_gains(c, ctx.g0)?;
    if ctx.at_truth() {
        return Ok(TwoStepObserver::at_truth(gains, ctx.g0, ctx.truth));
    }
    let tilt = ctx.tilt0()?;
    // Velocity starts at the measurement; for order 1 this fixes x̂₂′(0) = 0.
    let prime = if gains.order() == 1 { Vec3::zeros() } else { *tilt };
    Ok(TwoStepObserver::new(gains, ctx.g0, ctx.y0.y_v, prime, tilt))
}

fn hua(k1v: f64, k2v: f64, k1r: f64, ctx: &InitContext<'_>) -> Result<HuaObserver> {
    let gains = HuaGains::new(k1v, k2v, k1r, ctx.g0)?;
    Ok(if ctx.at_truth() {
        HuaObserver::at_truth(gains, ctx.g0, ctx.truth)
    } else {
        HuaObserver::new(gains, ctx.g0, ctx.y0.y_v, ctx.tilt0()?)
    })
}

#[derive(Clone, Debug)]
enum Inner {
    TwoStep(TwoStepObserver),
    OneStep(OneStepObserver),
    Hua(HuaObserver),
    Attitude(AttitudeObserver, TiltOutput),
    Martin(MartinAttitude),
}

/// One configured estimator of the comparison bank.
#[derive(Clone, Debug)]
pub struct Estimator {
    pub name: String,
    inner: Inner,
}

impl Estimator {
    pub fn build(cfg: &EstimatorConfig, ctx: &InitContext<'_>) -> Result<Self> {
        let named = |e: Error| match e {
            Error::Config(s) => Error::Config(format!("estimator {:?}: {s}", cfg.name)),
            other => Error::Config(format!("estimator {:?}: {other}", cfg.name)),
        };
        Self::build_inner(&cfg.kind, ctx).map(|inner| Estimator { name: cfg.name.clone(), inner }).map_err(named)
    }

    fn build_inner(kind: &EstimatorKind, ctx: &InitContext<'_>) -> Result<Inner> {
        Ok(match kind {
            EstimatorKind::TwoStep(c) => Inner::TwoStep(two_step(c, ctx)?),
            EstimatorKind::OneStep { alpha, gamma } => {
                let gains = OneStepGains::new(*alpha, *gamma, ctx.g0)?;
                Inner::OneStep(if ctx.at_truth() {
                    OneStepObserver::at_truth(gains, ctx.g0, ctx.truth)
                } else {
                    OneStepObserver::new(gains, ctx.g0, ctx.y0.y_v, ctx.tilt0()?)
                })
            }
            EstimatorKind::Hua { k1v, k2v, k1r } => Inner::Hua(hua(*k1v, *k2v, *k1r, ctx)?),
            EstimatorKind::Attitude { rho1, rho2, mu, stage, tilt_output } => {
                let gains = AttitudeGains::new(*rho1, *rho2, *mu)?;
                let stage = match stage {
                    StageConfig::TwoStep(c) => TiltStage::TwoStep(two_step(c, ctx)?),
                    StageConfig::Hua { k1v, k2v, k1r } => TiltStage::Hua(hua(*k1v, *k2v, *k1r, ctx)?),
                };
                let out = tilt_output.unwrap_or(if *rho2 == 0.0 { TiltOutput::Stage } else { TiltOutput::Attitude });
                Inner::Attitude(AttitudeObserver::new(gains, ctx.m, stage, ctx.rhat0()?), out)
            }
            EstimatorKind::Martin { l, k, m } => {
                let gains = MartinGains::new(*l, *k, *m)?;
                let tilt = if ctx.at_truth() {
                    MartinTilt::at_truth(gains, ctx.g0, ctx.truth, &ctx.m)
                } else {
                    let r = ctx.rhat0()?;
                    MartinTilt::new(gains, ctx.g0, ctx.y0.y_v, r.inverse_apply(&E_Z), r.inverse_apply(&ctx.m))
                };
                Inner::Martin(MartinAttitude::new(tilt, ctx.m))
            }
        })
    }

    pub fn step(&mut self, hold: &Hold<'_>, dt: f64) {
        match &mut self.inner {
            Inner::TwoStep(o) => o.step(hold, dt),
            Inner::OneStep(o) => o.step(hold, dt),
            Inner::Hua(o) => o.step(hold, dt),
            Inner::Attitude(o, _) => o.step(hold, dt),
            Inner::Martin(o) => o.step(hold, dt),
        }
    }

    /// Reported tilt estimate; unconstrained for the TRIAD baseline.
    pub fn tilt(&self) -> Vec3 {
        match &self.inner {
            Inner::TwoStep(o) => o.state().xhat2,
            Inner::OneStep(o) => o.xhat2,
            Inner::Hua(o) => o.xhat2,
            Inner::Attitude(o, TiltOutput::Attitude) => o.rhat().inverse_apply(&E_Z),
            Inner::Attitude(o, TiltOutput::Stage) => match o.stage() {
                TiltStage::TwoStep(s) => s.state().xhat2,
                TiltStage::Hua(s) => s.xhat2,
            },
            Inner::Martin(o) => o.filters().xhat2_prime,
        }
    }

    /// Whether [`Estimator::tilt`] is kept on the unit sphere.
    pub fn tilt_is_constrained(&self) -> bool {
        !matches!(self.inner, Inner::Martin(_))
    }

    /// Unconstrained intermediate tilt of two-step designs.
    pub fn intermediate(&self) -> Option<Vec3> {
        match &self.inner {
            Inner::TwoStep(o) => Some(o.state().xhat2_prime),
            Inner::Attitude(o, _) => match o.stage() {
                TiltStage::TwoStep(s) => Some(s.state().xhat2_prime),
                TiltStage::Hua(_) => None,
            },
            _ => None,
        }
    }

    pub fn velocity(&self) -> Vec3 {
        match &self.inner {
            Inner::TwoStep(o) => o.velocity(),
            Inner::OneStep(o) => o.velocity(),
            Inner::Hua(o) => o.velocity(),
            Inner::Attitude(o, _) => match o.stage() {
                TiltStage::TwoStep(s) => s.velocity(),
                TiltStage::Hua(s) => s.velocity(),
            },
            Inner::Martin(o) => o.filters().velocity(),
        }
    }

    pub fn has_attitude(&self) -> bool {
        matches!(self.inner, Inner::Attitude(..) | Inner::Martin(_))
    }

    /// `None` for tilt-only estimators; `Some(None)` for an invalid sample.
    pub fn attitude(&self) -> Option<Option<Rotation>> {
        match &self.inner {
            Inner::Attitude(o, _) => Some(o.attitude()),
            Inner::Martin(o) => Some(o.attitude()),
            _ => None,
        }
    }

    /// Record columns, without the `<name>.` prefix.
    pub fn fields(&self) -> Vec<String> {
        let mut f: Vec<String> = Vec::new();
        let v3 = |f: &mut Vec<String>, p: &str| f.extend(["x", "y", "z"].iter().map(|c| format!("{p}.{c}")));
        v3(&mut f, "xhat1");
        v3(&mut f, "xhat2");
        if self.intermediate().is_some() {
            v3(&mut f, "xhat2_prime");
        }
        if self.has_attitude() {
            f.extend((1..=3).flat_map(|i| (1..=3).map(move |j| format!("Rhat{i}{j}"))));
            f.push("valid".into());
        }
        f.push("tilt_angle".into());
        if self.has_attitude() {
            f.push("yaw_angle".into());
        }
        f
    }
}
