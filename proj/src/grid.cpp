#include "khess/grid.hpp"

#include "khess/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace khess {

GridDomain::GridDomain(int dim, std::span<const double> low, std::span<const double> high, int resolution)
    : dim_(dim), resolution_(resolution) {
    if (dim != 2 && dim != 3) throw DomainError("grid: dimension must be 2 or 3");
    if (resolution < 5) throw DomainError("grid: resolution must be at least 5");
    if (low.size() != static_cast<std::size_t>(dim) || high.size() != static_cast<std::size_t>(dim))
        throw DomainError("grid: corner arrays must have length dim");
    const double extent = high[0] - low[0];
    if (!(extent > 0.0)) throw DomainError("grid: empty box");
    for (int a = 0; a < dim; ++a) {
        low_[a] = low[a];
        high_[a] = high[a];
        if (std::abs((high[a] - low[a]) - extent) > 1e-12 * extent)
            throw DomainError("grid: spacing must agree on all axes");
    }
    h_ = extent / (resolution - 1);
    count_ = 1;
    for (int a = dim - 1; a >= 0; --a) {
        stride_[a] = count_;
        count_ *= static_cast<std::size_t>(resolution);
    }
}

GridDomain GridDomain::cube(int dim, double low, double high, int resolution) {
    const std::array<double, 3> lo{low, low, low}, hi{high, high, high};
    return GridDomain(dim, std::span(lo.data(), dim), std::span(hi.data(), dim), resolution);
}

std::array<int, 3> GridDomain::coords(std::size_t node) const {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < dim_; ++a) c[a] = static_cast<int>((node / stride_[a]) % resolution_);
    return c;
}

std::size_t GridDomain::index(const std::array<int, 3>& c) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx += static_cast<std::size_t>(c[a]) * stride_[a];
    return idx;
}

Point GridDomain::position(std::size_t node) const {
    const auto c = coords(node);
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[a] = low_[a] + c[a] * h_;
    return x;
}

bool GridDomain::on_box_boundary(std::size_t node) const {
    const auto c = coords(node);
    for (int a = 0; a < dim_; ++a)
        if (c[a] == 0 || c[a] == resolution_ - 1) return true;
    return false;
}

ScalarField::ScalarField(GridDomain domain, std::vector<double> values, std::vector<std::uint8_t> pinned)
    : domain_(std::move(domain)), values_(std::move(values)), pinned_(std::move(pinned)) {
    if (values_.size() != domain_.node_count() || pinned_.size() != domain_.node_count())
        throw DomainError("field: array sizes do not match the grid");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (domain_.on_box_boundary(i)) pinned_[i] = 1;
}

ScalarField ScalarField::box(const GridDomain& domain, const std::function<double(const Point&)>& interior,
                             const std::function<double(const Point&)>& boundary) {
    return masked(domain, [](const Point&) { return true; }, interior, boundary);
}

ScalarField ScalarField::masked(const GridDomain& domain, const std::function<bool(const Point&)>& inside,
                                const std::function<double(const Point&)>& interior,
                                const std::function<double(const Point&)>& boundary) {
    const std::size_t n = domain.node_count();
    std::vector<double> values(n);
    std::vector<std::uint8_t> pinned(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const Point x = domain.position(i);
        const bool pin = domain.on_box_boundary(i) || !inside(x);
        pinned[i] = pin ? 1 : 0;
        values[i] = pin ? boundary(x) : interior(x);
    }
    return ScalarField(domain, std::move(values), std::move(pinned));
}

std::vector<std::size_t> ScalarField::active_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!pinned_[i]) out.push_back(i);
    return out;
}

void ScalarField::set_active(std::size_t node, double v) {
    if (pinned_[node]) throw DomainError("field: pinned node is boundary data");
    values_[node] = v;
}

ScalarField ScalarField::scaled(double s) const {
    std::vector<double> v = values_;
    for (double& x : v) x *= s;
    return ScalarField(domain_, std::move(v), pinned_);
}

SymMatrix discrete_hessian(const ScalarField& u, std::size_t node) {
    const GridDomain& g = u.domain();
    if (node >= g.node_count() || g.on_box_boundary(node))
        throw DomainError("discrete_hessian: node has no full neighbourhood");
    const double h2 = g.spacing() * g.spacing();
    const auto v = u.values();
    SymMatrix H(static_cast<std::size_t>(g.dim()));
    for (int p = 0; p < g.dim(); ++p) {
        const std::size_t sp = g.stride(p);
        H.set(p, p, (v[node + sp] - 2.0 * v[node] + v[node - sp]) / h2);
        for (int q = p + 1; q < g.dim(); ++q) {
            const std::size_t sq = g.stride(q);
            const double cross = v[node + sp + sq] - v[node + sp - sq] - v[node - sp + sq] + v[node - sp - sq];
            H.set(p, q, cross / (4.0 * h2));
        }
    }
    return H;
}

Point discrete_gradient(const ScalarField& u, std::size_t node) {
    const GridDomain& g = u.domain();
    if (node >= g.node_count() || g.on_box_boundary(node))
        throw DomainError("discrete_gradient: node has no full neighbourhood");
    const auto v = u.values();
    Point d{0.0, 0.0, 0.0};
    for (int p = 0; p < g.dim(); ++p) {
        const std::size_t sp = g.stride(p);
        d[p] = (v[node + sp] - v[node - sp]) / (2.0 * g.spacing());
    }
    return d;
}

std::vector<Point> gradient_field(const ScalarField& u) {
    const GridDomain& g = u.domain();
    const auto v = u.values();
    const double h = g.spacing();
    std::vector<Point> out(g.node_count(), Point{0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto c = g.coords(i);
        for (int p = 0; p < g.dim(); ++p) {
            const std::size_t s = g.stride(p);
            if (c[p] == 0)
                out[i][p] = (-3.0 * v[i] + 4.0 * v[i + s] - v[i + 2 * s]) / (2.0 * h);
            else if (c[p] == g.resolution() - 1)
                out[i][p] = (3.0 * v[i] - 4.0 * v[i - s] + v[i - 2 * s]) / (2.0 * h);
            else
                out[i][p] = (v[i + s] - v[i - s]) / (2.0 * h);
        }
    }
    return out;
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string join_corner(const Point& p, int dim) {
    std::string s;
    for (int a = 0; a < dim; ++a) {
        if (a) s += ',';
        s += fmt17(p[a]);
    }
    return s;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0') throw DomainError("field header: bad number '" + item + "'");
        out.push_back(x);
    }
    return out;
}

}  // namespace

void write_field(std::ostream& os, const ScalarField& u) {
    const GridDomain& g = u.domain();
    os << "khess-field v1 dim=" << g.dim() << " res=" << g.resolution() << " low=" << join_corner(g.low(), g.dim())
       << " high=" << join_corner(g.high(), g.dim()) << '\n';
    for (double x : u.values()) os << fmt17(x) << '\n';
}

ScalarField read_field(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw DomainError("field: missing header");
    std::stringstream hs(header);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != "khess-field" || version != "v1") throw DomainError("field: not a khess-field v1 file");

    int dim = 0, res = 0;
    std::vector<double> low, high;
    std::string token;
    while (hs >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw DomainError("field header: bad token '" + token + "'");
        const std::string key = token.substr(0, eq), val = token.substr(eq + 1);
        if (key == "dim") dim = std::stoi(val);
        else if (key == "res") res = std::stoi(val);
        else if (key == "low") low = parse_list(val);
        else if (key == "high") high = parse_list(val);
        else throw DomainError("field header: unknown key '" + key + "'");
    }
    GridDomain domain(dim, low, high, res);
    std::vector<double> values;
    values.reserve(domain.node_count());
    std::string line;
    while (values.size() < domain.node_count() && std::getline(is, line)) {
        if (line.empty()) continue;
        char* end = nullptr;
        const double x = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) throw DomainError("field: bad value line '" + line + "'");
        values.push_back(x);
    }
    if (values.size() != domain.node_count()) throw DomainError("field: truncated value list");
    std::vector<std::uint8_t> pinned(domain.node_count(), 0);
    return ScalarField(domain, std::move(values), std::move(pinned));
}

}  // namespace khess
