#include "khess/solver.hpp"

#include "khess/cone.hpp"
#include "khess/error.hpp"
#include "khess/symeig.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace khess {

RhsSpec RhsSpec::constant(double c) {
    if (!(c > 0.0)) throw DomainError("rhs: constant must be positive");
    RhsSpec r;
    r.kind = Kind::constant;
    r.value = [c](const Point&, double, const Point&) { return c; };
    r.sup_f = c;
    return r;
}

RhsSpec RhsSpec::position(std::function<double(const Point&)> f, double sup_f) {
    RhsSpec r;
    r.kind = Kind::position;
    r.value = [f = std::move(f)](const Point& x, double, const Point&) { return f(x); };
    r.sup_f = sup_f;
    return r;
}

RhsSpec RhsSpec::full(Value f, double sup_f, DerivU du, DerivP dp) {
    RhsSpec r;
    r.kind = Kind::full;
    r.value = std::move(f);
    r.du = std::move(du);
    r.dp = std::move(dp);
    r.sup_f = sup_f;
    return r;
}

double RhsSpec::operator()(const Point& x, double u, const Point& grad) const {
    const double v = value(x, u, grad);
    if (!(v > 0.0)) throw DomainError("rhs: f must be positive, got " + std::to_string(v));
    return v;
}

double QuadraticBarrier::operator()(const Point& x) const {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    return 0.5 * a * r2 - b;
}

QuadraticBarrier subsolution_quadratic(const ScalarField& boundary, const RhsSpec& rhs, int k) {
    const GridDomain& g = boundary.domain();
    if (k < 1 || k > g.dim()) throw DomainError("initial_guess: k outside 1..dim");
    if (!(rhs.sup_f > 0.0) || !std::isfinite(rhs.sup_f)) throw DomainError("initial_guess: sup_f must be finite and positive");
    QuadraticBarrier w;
    w.dim = g.dim();
    w.a = 1.1 * std::pow(rhs.sup_f / binomial(g.dim(), k), 1.0 / k);
    for (int a = 0; a < g.dim(); ++a) w.center[a] = 0.5 * (g.low()[a] + g.high()[a]);

    double floor = 0.0;
    double reach = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const Point x = g.position(i);
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += (x[a] - w.center[a]) * (x[a] - w.center[a]);
        reach = std::max(reach, 0.5 * w.a * r2);
        if (boundary.pinned(i)) floor = std::min(floor, boundary[i]);
    }
    w.b = reach - floor;
    return w;
}

ScalarField initial_guess(const ScalarField& boundary, const RhsSpec& rhs, int k) {
    const QuadraticBarrier w = subsolution_quadratic(boundary, rhs, k);
    ScalarField out = boundary;
    const GridDomain& g = boundary.domain();
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (!out.pinned(i)) out.set_active(i, w(g.position(i)));
    return out;
}

ScalarField initial_guess(const GridDomain& domain, const RhsSpec& rhs, int k) {
    const auto zero = [](const Point&) { return 0.0; };
    return initial_guess(ScalarField::box(domain, zero, zero), rhs, k);
}

namespace {

struct LocalHessian {
    double a[3][3] = {};
    int d = 2;
};

LocalHessian local_hessian(std::span<const double> v, std::size_t node, const GridDomain& g) {
    LocalHessian H;
    H.d = g.dim();
    const double h2 = g.spacing() * g.spacing();
    for (int p = 0; p < H.d; ++p) {
        const std::size_t sp = g.stride(p);
        H.a[p][p] = (v[node + sp] - 2.0 * v[node] + v[node - sp]) / h2;
        for (int q = p + 1; q < H.d; ++q) {
            const std::size_t sq = g.stride(q);
            const double c = v[node + sp + sq] - v[node + sp - sq] - v[node - sp + sq] + v[node - sp - sq];
            H.a[p][q] = H.a[q][p] = c / (4.0 * h2);
        }
    }
    return H;
}

Point local_gradient(std::span<const double> v, std::size_t node, const GridDomain& g) {
    Point d{0.0, 0.0, 0.0};
    for (int p = 0; p < g.dim(); ++p) {
        const std::size_t sp = g.stride(p);
        d[p] = (v[node + sp] - v[node - sp]) / (2.0 * g.spacing());
    }
    return d;
}

// σ_k(H) from principal minors, and its derivative T_{k-1} = ∂σ_k/∂H.
double sigma_with_tensor(const LocalHessian& H, int k, double T[3][3]) {
    const auto& a = H.a;
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) T[p][q] = 0.0;
    if (H.d == 2) {
        if (k == 1) {
            T[0][0] = T[1][1] = 1.0;
            return a[0][0] + a[1][1];
        }
        T[0][0] = a[1][1];
        T[1][1] = a[0][0];
        T[0][1] = T[1][0] = -a[0][1];
        return a[0][0] * a[1][1] - a[0][1] * a[0][1];
    }
    const double s1 = a[0][0] + a[1][1] + a[2][2];
    if (k == 1) {
        T[0][0] = T[1][1] = T[2][2] = 1.0;
        return s1;
    }
    const double m01 = a[0][0] * a[1][1] - a[0][1] * a[0][1];
    const double m02 = a[0][0] * a[2][2] - a[0][2] * a[0][2];
    const double m12 = a[1][1] * a[2][2] - a[1][2] * a[1][2];
    if (k == 2) {
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) T[p][q] = (p == q ? s1 : 0.0) - a[p][q];
        return m01 + m02 + m12;
    }
    // adjugate
    T[0][0] = m12;
    T[1][1] = m02;
    T[2][2] = m01;
    T[0][1] = T[1][0] = a[0][2] * a[1][2] - a[0][1] * a[2][2];
    T[0][2] = T[2][0] = a[0][1] * a[1][2] - a[0][2] * a[1][1];
    T[1][2] = T[2][1] = a[0][1] * a[0][2] - a[0][0] * a[1][2];
    return a[0][0] * m12 + a[0][1] * T[0][1] + a[0][2] * T[0][2];
}

double cone_margin(const LocalHessian& H, int k) {
    double lam[3];
    if (H.d == 2) {
        const auto e = eigenvalues_sym2(H.a[0][0], H.a[0][1], H.a[1][1]);
        lam[0] = e[0];
        lam[1] = e[1];
    } else {
        const auto e = eigenvalues_sym3(H.a[0][0], H.a[0][1], H.a[0][2], H.a[1][1], H.a[1][2], H.a[2][2]);
        lam[0] = e[0];
        lam[1] = e[1];
        lam[2] = e[2];
    }
    const std::span<const double> spec(lam, static_cast<std::size_t>(H.d));
    double scale = 1.0;
    for (double x : spec) scale = std::max(scale, std::abs(x));
    const auto e = elementary_all(spec);
    double margin = std::numeric_limits<double>::infinity();
    double power = 1.0;
    for (int m = 1; m <= k; ++m) {
        power *= scale;
        margin = std::min(margin, e[m] / power);
    }
    return margin;
}

class NewtonSystem {
public:
    NewtonSystem(const ScalarField& start, const RhsSpec& rhs, int k)
        : g_(start.domain()), rhs_(rhs), k_(k), pinned_(start.pinned_mask().begin(), start.pinned_mask().end()) {
        for (std::size_t i = 0; i < g_.node_count(); ++i)
            if (!start.pinned(i)) active_.push_back(i);
        unknown_.assign(g_.node_count(), -1);
        for (std::size_t j = 0; j < active_.size(); ++j) unknown_[active_[j]] = static_cast<long>(j);
        positions_.reserve(active_.size());
        for (std::size_t node : active_) positions_.push_back(g_.position(node));
    }

    std::size_t size() const { return active_.size(); }
    const std::vector<std::size_t>& active() const { return active_; }

    void residual(std::span<const double> v, std::vector<double>& out) const {
        out.resize(active_.size());
        double T[3][3];
        for (std::size_t j = 0; j < active_.size(); ++j) {
            const std::size_t node = active_[j];
            const LocalHessian H = local_hessian(v, node, g_);
            const double s = sigma_with_tensor(H, k_, T);
            out[j] = s - rhs_(positions_[j], v[node], local_gradient(v, node, g_));
        }
    }

    double min_margin(std::span<const double> v) const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t node : active_) m = std::min(m, cone_margin(local_hessian(v, node, g_), k_));
        return m;
    }

    Eigen::SparseMatrix<double> jacobian(std::span<const double> v) const {
        const int d = g_.dim();
        const double h = g_.spacing();
        const double h2 = h * h;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(active_.size() * (d == 2 ? 9 : 19));
        auto add = [&](long row, std::size_t node, double val) {
            const long col = unknown_[node];
            if (col >= 0 && val != 0.0) trip.emplace_back(row, col, val);
        };
        double T[3][3];
        for (std::size_t j = 0; j < active_.size(); ++j) {
            const long row = static_cast<long>(j);
            const std::size_t node = active_[j];
            const LocalHessian H = local_hessian(v, node, g_);
            sigma_with_tensor(H, k_, T);

            double centre = 0.0;
            for (int p = 0; p < d; ++p) {
                const std::size_t sp = g_.stride(p);
                centre -= 2.0 * T[p][p] / h2;
                add(row, node + sp, T[p][p] / h2);
                add(row, node - sp, T[p][p] / h2);
                for (int q = p + 1; q < d; ++q) {
                    const std::size_t sq = g_.stride(q);
                    const double c = T[p][q] / (2.0 * h2);
                    add(row, node + sp + sq, c);
                    add(row, node - sp - sq, c);
                    add(row, node + sp - sq, -c);
                    add(row, node - sp + sq, -c);
                }
            }

            if (rhs_.kind == RhsSpec::Kind::full) {
                const Point grad = local_gradient(v, node, g_);
                const Point& x = positions_[j];
                const double u = v[node];
                double fu;
                Point fp{0.0, 0.0, 0.0};
                if (rhs_.du) {
                    fu = rhs_.du(x, u, grad);
                } else {
                    const double step = 1e-6 * (1.0 + std::abs(u));
                    fu = (rhs_(x, u + step, grad) - rhs_(x, u, grad)) / step;
                }
                if (rhs_.dp) {
                    fp = rhs_.dp(x, u, grad);
                } else {
                    const double f0 = rhs_(x, u, grad);
                    for (int p = 0; p < d; ++p) {
                        Point gp = grad;
                        const double step = 1e-6 * (1.0 + std::abs(grad[p]));
                        gp[p] += step;
                        fp[p] = (rhs_(x, u, gp) - f0) / step;
                    }
                }
                centre -= fu;
                for (int p = 0; p < d; ++p) {
                    const std::size_t sp = g_.stride(p);
                    add(row, node + sp, -fp[p] / (2.0 * h));
                    add(row, node - sp, fp[p] / (2.0 * h));
                }
            }
            add(row, node, centre);
        }
        const auto n = static_cast<Eigen::Index>(active_.size());
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        return J;
    }

private:
    const GridDomain& g_;
    const RhsSpec& rhs_;
    int k_;
    std::vector<std::uint8_t> pinned_;
    std::vector<std::size_t> active_;
    std::vector<long> unknown_;
    std::vector<Point> positions_;
};

double max_abs(const std::vector<double>& r) {
    double m = 0.0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m;
}

double l2(const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::vector<double> residual(const ScalarField& u, const RhsSpec& rhs, int k) {
    NewtonSystem sys(u, rhs, k);
    std::vector<double> r;
    sys.residual(u.values(), r);
    return r;
}

double min_cone_margin(const ScalarField& u, int k) {
    const auto v = u.values();
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t node : u.active_nodes()) m = std::min(m, cone_margin(local_hessian(v, node, u.domain()), k));
    return m;
}

namespace {

class LinearSolver {
public:
    LinearSolver(const GridDomain& g, const SolveOptions& opts)
        : direct_(opts.linear == SolveOptions::Linear::direct ||
                  (opts.linear == SolveOptions::Linear::automatic && g.dim() == 2)) {
        krylov_.setTolerance(opts.iterative_tol);
        krylov_.setMaxIterations(20000);
    }

    // Returns false when the system could not be solved.
    bool solve(const Eigen::SparseMatrix<double>& J, const std::vector<double>& F, Eigen::VectorXd& step) {
        const auto n = static_cast<Eigen::Index>(F.size());
        Eigen::VectorXd rhs(n);
        for (Eigen::Index j = 0; j < n; ++j) rhs[j] = -F[static_cast<std::size_t>(j)];
        if (direct_) {
            if (!pattern_ready_) {
                lu_.analyzePattern(J);
                pattern_ready_ = true;
            }
            lu_.factorize(J);
            if (lu_.info() != Eigen::Success) return false;
            step = lu_.solve(rhs);
            return true;
        }
        krylov_.compute(J);
        step = krylov_.solveWithGuess(rhs, Eigen::VectorXd::Zero(n));
        return krylov_.info() == Eigen::Success || krylov_.error() <= 1e-6;
    }

private:
    bool direct_;
    bool pattern_ready_ = false;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> krylov_;
};

void add_step(std::vector<double>& v, const NewtonSystem& sys, const Eigen::VectorXd& step, double alpha) {
    for (std::size_t j = 0; j < sys.size(); ++j) v[sys.active()[j]] += alpha * step[static_cast<Eigen::Index>(j)];
}

// Damped Newton on the values `v` (pinned entries fixed); `report` accumulates
// across continuation stages.
void newton(const NewtonSystem& sys, LinearSolver& linear, std::vector<double>& v, const SolveOptions& opts,
            SolveReport& report) {
    const double margin0 = sys.min_margin(v);
    report.iterate_cone_margin.push_back(margin0);
    if (margin0 < -opts.cone_tol) throw ConeViolation("solve: initial iterate is not admissible", report);

    std::vector<double> F, Ftrial;
    sys.residual(v, F);
    report.residual_history.push_back(max_abs(F));

    Eigen::VectorXd step;
    std::vector<double> trial(v.size());
    // The budget applies per call, i.e. per continuation stage.
    const int budget_end = report.iterations + opts.max_iter;
    while (true) {
        report.final_residual = max_abs(F);
        if (report.final_residual <= opts.tol) {
            report.converged = true;
            return;
        }
        if (report.iterations >= budget_end) throw NonConvergence("solve: iteration limit reached", report);
        ++report.iterations;

        if (!linear.solve(sys.jacobian(v), F, step)) throw NonConvergence("solve: Newton system not solvable", report);

        const double merit = l2(F);
        double alpha = 1.0;
        bool accepted = false;
        bool any_admissible = false;
        double margin = 0.0;
        for (int halving = 0; halving <= opts.max_halvings; ++halving, alpha *= 0.5) {
            trial = v;
            add_step(trial, sys, step, alpha);
            margin = sys.min_margin(trial);
            if (margin < -opts.cone_tol) {
                ++report.admissibility_violations;
                continue;
            }
            any_admissible = true;
            sys.residual(trial, Ftrial);
            if (l2(Ftrial) < merit) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!any_admissible) throw ConeViolation("solve: no admissible step after halving", report);
            throw NonConvergence("solve: line search stalled", report);
        }
        v.swap(trial);
        F.swap(Ftrial);
        report.damping_history.push_back(alpha);
        report.iterate_cone_margin.push_back(margin);
        report.residual_history.push_back(max_abs(F));
    }
}

// Pinned nodes read by the Hessian stencil of some active node.
std::vector<std::uint8_t> stencil_ring(const ScalarField& u) {
    const GridDomain& g = u.domain();
    std::vector<std::uint8_t> ring(g.node_count(), 0);
    const int n = g.dim();
    for (std::size_t i : u.active_nodes()) {
        const auto c = g.coords(i);
        std::array<int, 3> d{0, 0, 0};
        const int span = n == 3 ? 1 : 0;
        for (d[0] = -1; d[0] <= 1; ++d[0])
            for (d[1] = -1; d[1] <= 1; ++d[1])
                for (d[2] = -span; d[2] <= span; ++d[2]) {
                    std::array<int, 3> e = c;
                    for (int a = 0; a < n; ++a) e[a] += d[a];
                    const std::size_t j = g.index(e);
                    if (u.pinned(j)) ring[j] = 1;
                }
    }
    return ring;
}

bool zero_box_data(const ScalarField& u) {
    const GridDomain& g = u.domain();
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (u.pinned(i) != g.on_box_boundary(i)) return false;
        if (u.pinned(i) && u[i] != 0.0) return false;
    }
    return true;
}

}  // namespace

ScalarField power_product_start(const GridDomain& domain, const RhsSpec& rhs, int k) {
    const int n = domain.dim();
    if (k < 1 || k > n) throw DomainError("power_product_start: k outside 1..dim");
    const double p = 0.8 / n;
    const double len = domain.high()[0] - domain.low()[0];
    // D²u at the centre is A·(L²/4)^{np}·(8p/L²)·I; match σ_k there to sup f.
    const double c = std::pow(rhs.sup_f / binomial(n, k), 1.0 / k);
    const double amp = c / (std::pow(0.25 * len * len, n * p) * 8.0 * p / (len * len));
    const auto zero = [](const Point&) { return 0.0; };
    return ScalarField::box(
        domain,
        [&](const Point& x) {
            double q = 1.0;
            for (int a = 0; a < n; ++a) q *= (x[a] - domain.low()[a]) * (domain.high()[a] - x[a]);
            return -amp * std::pow(q, p);
        },
        zero);
}

SolveResult solve(const ScalarField& start, const RhsSpec& rhs, const SolveOptions& opts) {
    const GridDomain& g = start.domain();
    if (opts.k < 1 || opts.k > g.dim()) throw DomainError("solve: k outside 1..dim");
    if (!(opts.tol > 0.0)) throw DomainError("solve: tolerance must be positive");

    const NewtonSystem sys(start, rhs, opts.k);
    LinearSolver linear(g, opts);
    SolveReport report;
    std::vector<double> v(start.values().begin(), start.values().end());
    const std::vector<std::uint8_t> mask(start.pinned_mask().begin(), start.pinned_mask().end());

    if (sys.min_margin(v) >= -opts.cone_tol) {
        newton(sys, linear, v, opts, report);
        return {ScalarField(g, std::move(v), mask), report};
    }

    // Clamping the barrier quadratic to the boundary data leaves a kink that the
    // central-difference stencil sees as indefinite next to the boundary. Start
    // instead from an admissible field and continue in the boundary data, with
    // an Euler predictor using the Jacobian at the last admissible state.
    std::vector<double> from(g.node_count());
    if (zero_box_data(start)) {
        const ScalarField p = power_product_start(g, rhs, opts.k);
        from.assign(p.values().begin(), p.values().end());
    } else {
        // Only pinned nodes inside some active stencil matter; lower the barrier
        // just enough to sit below the data there, so the jump to continue over
        // stays small.
        QuadraticBarrier w = subsolution_quadratic(start, rhs, opts.k);
        const std::vector<std::uint8_t> ring = stencil_ring(start);
        double b = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < from.size(); ++i)
            if (ring[i]) b = std::max(b, w(g.position(i)) + w.b - start[i]);
        w.b = b;
        for (std::size_t i = 0; i < from.size(); ++i) from[i] = (!mask[i] || ring[i]) ? w(g.position(i)) : start[i];
    }
    v = from;

    SolveOptions stage = opts;
    stage.tol = std::max(opts.tol, 1e-3 * rhs.sup_f);
    newton(sys, linear, v, stage, report);

    double t = 0.0;
    double dt = 1.0;
    std::vector<double> trial, F;
    Eigen::VectorXd step;
    while (t < 1.0) {
        const double next = std::min(1.0, t + dt);
        trial = v;
        for (std::size_t i = 0; i < trial.size(); ++i)
            if (mask[i]) trial[i] = (1.0 - next) * from[i] + next * start[i];
        sys.residual(trial, F);
        if (!linear.solve(sys.jacobian(v), F, step))
            throw NonConvergence("solve: continuation predictor not solvable", report);
        add_step(trial, sys, step, 1.0);
        if (sys.min_margin(trial) < -opts.cone_tol) {
            ++report.admissibility_violations;
            dt *= 0.5;
            if (dt < 1e-6) throw ConeViolation("solve: boundary continuation cannot stay admissible", report);
            continue;
        }
        newton(sys, linear, trial, next < 1.0 ? stage : opts, report);
        v.swap(trial);
        ++report.continuation_stages;
        t = next;
        dt = std::min(2.0 * dt, 1.0);
    }
    return {ScalarField(g, std::move(v), mask), report};
}

SolveResult solve_dirichlet(const GridDomain& domain, const RhsSpec& rhs, int k, double tol, int max_iter) {
    SolveOptions opts;
    opts.k = k;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return solve(initial_guess(domain, rhs, k), rhs, opts);
}

}  // namespace khess
