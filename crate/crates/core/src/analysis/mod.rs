//! Error metrics, Lyapunov functions, equilibria and linearization, and
//! autonomous error-flow integrators used to verify the observers.

mod equilibria;
mod flows;
mod lyapunov;
mod metrics;

pub use equilibria::{build_wrho, linearization_a, linearization_fd, undesired_init, LinearizationA, Wrho};
pub use flows::{
    integrate_one_step_flow, integrate_principal_attitude_flow, integrate_tilt_flow, one_step_flow_rhs,
    renormalize_z2, tilt_flow_rhs, OneStepFlow, TiltFlowState,
};
pub use lyapunov::{
    attitude_vdot, attitude_vdot_bound, lyapunov_att, lyapunov_one_step, lyapunov_one_step_dot, lyapunov_v1,
    lyapunov_vn, varpi,
};
pub use metrics::{
    convergence_time, mean_error_window, tilt_metrics, yaw_proxy_angle, horizontal_direction, TiltMetrics,
    WindowMean,
};
