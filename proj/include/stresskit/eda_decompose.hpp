#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "stresskit/core.hpp"
#include "stresskit/qp.hpp"

namespace stresskit::eda {

struct NonUniformSampling : Error { using Error::Error; };
struct SessionTooShort : Error { using Error::Error; };
using qp::DidNotConverge;

// Parameters of the tonic/phasic decomposition: a biexponential impulse
// response for the phasic channel, a coarse cubic spline plus linear drift
// for the tonic channel, an L1 weight on the non-negative driver and a ridge
// on the spline coefficients.
struct CvxEdaConfig {
    double tau0_s = 2.0;           // slow IRF time constant
    double tau1_s = 0.7;           // fast IRF time constant
    double knot_spacing_s = 10.0;  // tonic spline knot spacing
    double alpha = 8e-4;           // driver sparsity weight
    double gamma_l = 1e-2;         // tonic smoothness (ridge) weight
    double irf_truncation_s = 10.0;
    double solver_tol = 1e-6;  // max KKT residual of the returned point
    int max_iters = 40000;     // total coordinate sweeps across outer passes
};

// Decomposition of a normalized EDA trace: input = tonic + phasic + residual,
// phasic = convolution(kernel, driver), driver >= 0. All series share the
// input's (uniform) timestamps.
struct EdaDecomposition {
    TimeSeries tonic;
    TimeSeries phasic;
    TimeSeries driver;
    TimeSeries residual;

    struct SolveInfo {
        double objective = 0.0;
        double kkt_residual = 0.0;
        int outer_iterations = 0;
        int total_sweeps = 0;
    } info;
};

// True when successive timestamps differ by a constant step (1e-6 s slack).
bool is_uniform(const TimeSeries& series);

// Linear interpolation onto a uniform grid at the given rate, spanning
// [first, last] of the input. Used to repair gaps left by sample-dropping
// filters before decomposition.
TimeSeries resample_uniform(const TimeSeries& series, double hz = 4.0);

// Biexponential kernel h(t) = exp(-t/tau0) - exp(-t/tau1), sampled at dt,
// scaled to unit peak, truncated at irf_truncation_s. h[0] == 0.
std::vector<double> build_irf_kernel(double dt, const CvxEdaConfig& config);

// Convolution operator for a uniformly sampled series; requires
// irf_truncation_s >= 5 * tau0 so the discarded tail is negligible.
qp::ConvolutionColumns build_irf_matrix(const std::vector<double>& timestamps,
                                        const CvxEdaConfig& config);

// Tonic model: clamped cubic B-spline columns on breakpoints every
// knot_spacing_s (the last span absorbs the remainder), giving
// floor(duration/spacing) + 3 columns, plus a two-column drift block
// [1, t_normalized].
struct TonicBasis {
    Eigen::MatrixXd spline;  // n x (floor(duration/spacing) + 3)
    Eigen::MatrixXd drift;   // n x 2
};

TonicBasis build_tonic_basis(const std::vector<double>& timestamps,
                             const CvxEdaConfig& config);

// Minimizes 0.5*|y - conv(h,q) - B*l - C*d|^2 + alpha*sum(q)
// + 0.5*gamma_l*|l|^2 over q >= 0, l, d, by coordinate descent on the driver
// alternated with exact solves of the tonic block.
EdaDecomposition solve_decomposition(const TimeSeries& eda, const CvxEdaConfig& config);

// Four-column inspection export: t_seconds,tonic,phasic,driver.
void write_decomposition_csv(const std::filesystem::path& path, const EdaDecomposition& d);

}  // namespace stresskit::eda
