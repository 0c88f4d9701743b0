#include "stresskit/eda_decompose.hpp"

#include <algorithm>
#include <cmath>

#include "stresskit/csvio.hpp"

namespace stresskit::eda {

bool is_uniform(const TimeSeries& series) {
    if (series.size() < 2) return true;
    const double dt = series.timestamps[1] - series.timestamps[0];
    for (std::size_t i = 2; i < series.size(); ++i) {
        const double step = series.timestamps[i] - series.timestamps[i - 1];
        if (std::abs(step - dt) > 1e-6) return false;
    }
    return true;
}

TimeSeries resample_uniform(const TimeSeries& series, double hz) {
    if (series.empty()) throw NonUniformSampling("resample_uniform: empty series");
    const double dt = 1.0 / hz;
    const double t0 = series.timestamps.front();
    const double t_end = series.timestamps.back();
    const auto n = static_cast<std::size_t>(std::floor((t_end - t0) / dt + 1e-9)) + 1;

    TimeSeries out;
    out.kind = series.kind;
    out.timestamps.resize(n);
    out.values.resize(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        while (j + 1 < series.size() && series.timestamps[j + 1] < t) ++j;
        if (j + 1 >= series.size()) {
            out.values[i] = series.values.back();
        } else {
            const double ta = series.timestamps[j], tb = series.timestamps[j + 1];
            const double va = series.values[j], vb = series.values[j + 1];
            const double w = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
            out.values[i] = va + w * (vb - va);
        }
        out.timestamps[i] = t;
    }
    return out;
}

std::vector<double> build_irf_kernel(double dt, const CvxEdaConfig& config) {
    if (!(config.tau0_s > config.tau1_s) || !(config.tau1_s > 0.0))
        throw std::invalid_argument("irf kernel: need tau0 > tau1 > 0");
    if (config.irf_truncation_s < 5.0 * config.tau0_s)
        throw std::invalid_argument("irf kernel: truncation shorter than 5*tau0");
    const auto len = static_cast<std::size_t>(std::floor(config.irf_truncation_s / dt + 1e-9)) + 1;
    std::vector<double> h(len);
    double peak = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const double t = static_cast<double>(k) * dt;
        h[k] = std::exp(-t / config.tau0_s) - std::exp(-t / config.tau1_s);
        peak = std::max(peak, h[k]);
    }
    if (peak <= 0.0) throw std::invalid_argument("irf kernel: degenerate sampling");
    for (double& v : h) v /= peak;
    return h;
}

qp::ConvolutionColumns build_irf_matrix(const std::vector<double>& timestamps,
                                        const CvxEdaConfig& config) {
    if (timestamps.size() < 2) throw SessionTooShort("irf matrix: fewer than 2 samples");
    TimeSeries probe;
    probe.timestamps = timestamps;
    probe.values.assign(timestamps.size(), 0.0);
    if (!is_uniform(probe)) throw NonUniformSampling("irf matrix: non-uniform timestamps");
    const double dt = timestamps[1] - timestamps[0];
    return qp::ConvolutionColumns(build_irf_kernel(dt, config),
                                  static_cast<Eigen::Index>(timestamps.size()));
}

namespace {

// Clamped cubic B-spline basis over the given breakpoints, evaluated by the
// Cox-de Boor recursion on the padded knot vector.
class ClampedCubicSpline {
public:
    explicit ClampedCubicSpline(const std::vector<double>& breaks) : end_(breaks.back()) {
        knots_.reserve(breaks.size() + 2 * (kOrder - 1));
        for (int i = 0; i < kOrder - 1; ++i) knots_.push_back(breaks.front());
        knots_.insert(knots_.end(), breaks.begin(), breaks.end());
        for (int i = 0; i < kOrder - 1; ++i) knots_.push_back(breaks.back());
        n_prev_.resize(knots_.size() - 1);
        n_cur_.resize(knots_.size() - 2);
    }

    std::size_t basis_count() const { return knots_.size() - kOrder; }

    // All basis values at t; the final interval is closed so t == end maps
    // onto the last basis functions.
    void eval_row(double t, Eigen::VectorXd& row) {
        std::fill(n_prev_.begin(), n_prev_.end(), 0.0);
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
            if (t >= knots_[i] && t < knots_[i + 1]) n_prev_[i] = 1.0;
        if (t >= end_) {
            for (std::size_t i = knots_.size() - 1; i-- > 0;) {
                if (knots_[i] < knots_[i + 1]) {
                    n_prev_[i] = 1.0;
                    break;
                }
            }
        }
        for (int k = 2; k <= kOrder; ++k) {
            const std::size_t cnt = knots_.size() - static_cast<std::size_t>(k);
            for (std::size_t i = 0; i < cnt; ++i) {
                double acc = 0.0;
                const double dl = knots_[i + static_cast<std::size_t>(k) - 1] - knots_[i];
                if (dl > 0.0) acc += (t - knots_[i]) / dl * n_prev_[i];
                const double dr = knots_[i + static_cast<std::size_t>(k)] - knots_[i + 1];
                if (dr > 0.0)
                    acc += (knots_[i + static_cast<std::size_t>(k)] - t) / dr * n_prev_[i + 1];
                n_cur_[i] = acc;
            }
            std::copy(n_cur_.begin(), n_cur_.begin() + static_cast<std::ptrdiff_t>(cnt),
                      n_prev_.begin());
        }
        row.resize(static_cast<Eigen::Index>(basis_count()));
        for (std::size_t i = 0; i < basis_count(); ++i)
            row[static_cast<Eigen::Index>(i)] = n_prev_[i];
    }

private:
    static constexpr int kOrder = 4;  // cubic
    std::vector<double> knots_;
    std::vector<double> n_prev_, n_cur_;
    double end_;
};

std::vector<double> spline_breakpoints(double t0, double duration, double spacing) {
    const auto g = static_cast<std::size_t>(std::floor(duration / spacing + 1e-9));
    std::vector<double> breaks;
    breaks.reserve(g + 1);
    for (std::size_t i = 0; i < g; ++i) breaks.push_back(t0 + static_cast<double>(i) * spacing);
    breaks.push_back(t0 + duration);  // final span absorbs any remainder
    return breaks;
}

}  // namespace

TonicBasis build_tonic_basis(const std::vector<double>& timestamps,
                             const CvxEdaConfig& config) {
    if (timestamps.size() < 2) throw SessionTooShort("tonic basis: fewer than 2 samples");
    const double t0 = timestamps.front();
    const double duration = timestamps.back() - t0;
    if (duration < 2.0 * config.knot_spacing_s)
        throw SessionTooShort("tonic basis: session shorter than two knot spacings");

    const auto breaks = spline_breakpoints(t0, duration, config.knot_spacing_s);
    const auto n = static_cast<Eigen::Index>(timestamps.size());

    ClampedCubicSpline spline(breaks);
    TonicBasis basis;
    basis.spline.resize(n, static_cast<Eigen::Index>(spline.basis_count()));
    basis.drift.resize(n, 2);
    Eigen::VectorXd row;
    for (Eigen::Index i = 0; i < n; ++i) {
        spline.eval_row(timestamps[static_cast<std::size_t>(i)], row);
        basis.spline.row(i) = row.transpose();
        basis.drift(i, 0) = 1.0;
        basis.drift(i, 1) = (timestamps[static_cast<std::size_t>(i)] - t0) / duration;
    }
    return basis;
}

EdaDecomposition solve_decomposition(const TimeSeries& eda, const CvxEdaConfig& config) {
    if (eda.size() < 2) throw SessionTooShort("decomposition: fewer than 2 samples");
    if (!is_uniform(eda)) throw NonUniformSampling("decomposition: non-uniform sampling");

    const auto n = static_cast<Eigen::Index>(eda.size());
    const Eigen::Map<const Eigen::VectorXd> y(eda.values.data(), n);

    const qp::ConvolutionColumns conv = build_irf_matrix(eda.timestamps, config);
    const TonicBasis basis = build_tonic_basis(eda.timestamps, config);
    const Eigen::Index nb = basis.spline.cols();

    // Tonic normal matrix [B C]'[B C] + diag(gamma_l * I, 0), factored once.
    Eigen::MatrixXd bc(n, nb + 2);
    bc.leftCols(nb) = basis.spline;
    bc.rightCols(2) = basis.drift;
    Eigen::MatrixXd normal = bc.transpose() * bc;
    normal.topLeftCorner(nb, nb) += config.gamma_l * Eigen::MatrixXd::Identity(nb, nb);
    const Eigen::LDLT<Eigen::MatrixXd> tonic_solver(normal);
    if (tonic_solver.info() != Eigen::Success)
        throw DidNotConverge("decomposition: tonic normal matrix factorization failed");

    const Eigen::VectorXd alpha_vec = Eigen::VectorXd::Constant(n, config.alpha);
    const std::vector<bool> all_masked(static_cast<std::size_t>(n), true);

    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(nb + 2);
    Eigen::VectorXd phasic = Eigen::VectorXd::Zero(n);

    EdaDecomposition out;
    int total_sweeps = 0;
    const int max_outer = 1000;
    bool converged = false;

    for (int outer = 0; outer < max_outer; ++outer) {
        // Exact tonic block given the current driver.
        conv.apply(q, phasic);
        coef = tonic_solver.solve(bc.transpose() * (y - phasic));
        const Eigen::VectorXd tonic = bc * coef;

        // Driver block: warm-started coordinate descent.
        qp::SolveOptions opts;
        opts.tol = 0.5 * config.solver_tol;
        opts.max_sweeps = std::max(1, std::min(200, config.max_iters - total_sweeps));
        opts.throw_on_limit = false;
        const qp::SolveResult sub =
            qp::nnls_cd(conv, y - tonic, alpha_vec, all_masked, opts, &q);
        q = sub.x;
        total_sweeps += sub.sweeps;

        // Joint KKT residual.
        conv.apply(q, phasic);
        const Eigen::VectorXd fit_resid = phasic + tonic - y;
        double viol = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double g = conv.column_dot(j, fit_resid) + config.alpha;
            if (q[j] <= config.solver_tol)
                viol = std::max(viol, -g);
            else
                viol = std::max(viol, std::abs(g));
        }
        Eigen::VectorXd grad_tonic = bc.transpose() * fit_resid;
        grad_tonic.head(nb) += config.gamma_l * coef.head(nb);
        viol = std::max(viol, grad_tonic.lpNorm<Eigen::Infinity>());

        out.info.kkt_residual = viol;
        out.info.outer_iterations = outer + 1;
        out.info.total_sweeps = total_sweeps;
        out.info.objective = 0.5 * fit_resid.squaredNorm() + config.alpha * q.sum() +
                             0.5 * config.gamma_l * coef.head(nb).squaredNorm();
        if (viol <= config.solver_tol) {
            converged = true;
            break;
        }
        if (total_sweeps >= config.max_iters) break;
    }
    if (!converged)
        throw DidNotConverge("decomposition: KKT residual " +
                             std::to_string(out.info.kkt_residual) + " after " +
                             std::to_string(out.info.total_sweeps) + " sweeps");

    conv.apply(q, phasic);
    const Eigen::VectorXd tonic = bc * coef;

    auto make_series = [&](const Eigen::VectorXd& v) {
        TimeSeries s;
        s.kind = SignalKind::Eda;
        s.timestamps = eda.timestamps;
        s.values.assign(v.data(), v.data() + v.size());
        return s;
    };
    out.tonic = make_series(tonic);
    out.phasic = make_series(phasic);
    out.driver = make_series(q);
    out.residual = make_series(y - tonic - phasic);
    return out;
}

void write_decomposition_csv(const std::filesystem::path& path, const EdaDecomposition& d) {
    std::string body = "t_seconds,tonic,phasic,driver\n";
    for (std::size_t i = 0; i < d.tonic.size(); ++i) {
        body += csv::format_double(d.tonic.timestamps[i]);
        body += ',' + csv::format_double(d.tonic.values[i]);
        body += ',' + csv::format_double(d.phasic.values[i]);
        body += ',' + csv::format_double(d.driver.values[i]);
        body += '\n';
    }
    csv::atomic_write(path, body);
}

}  // namespace stresskit::eda
