#include "quare/hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

namespace quare::geometry {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Facet {
    std::vector<int> vertices; // d indices, sorted
    VectorXd normal;           // outward unit normal
    double offset = 0.0;       // x . normal <= offset for hull interior
    bool alive = true;
};

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Volume of the d-simplex spanned by d+1 point indices.
double simplex_volume(const std::vector<VectorXd>& pts, const std::vector<int>& ids, int dim) {
    MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i) m.col(i) = pts[static_cast<std::size_t>(ids[static_cast<std::size_t>(i + 1)])] - pts[static_cast<std::size_t>(ids[0])];
    return std::abs(m.determinant()) / factorial(dim);
}

// Unit normal of the hyperplane through the facet's d vertices, oriented
// away from the interior point. Returns false when the vertices are
// affinely dependent.
bool facet_plane(const std::vector<VectorXd>& pts, Facet& f, const VectorXd& interior, int dim) {
    MatrixXd m(dim - 1, dim);
    const VectorXd& base = pts[static_cast<std::size_t>(f.vertices[0])];
    for (int i = 0; i < dim - 1; ++i)
        m.row(i) = (pts[static_cast<std::size_t>(f.vertices[static_cast<std::size_t>(i + 1)])] - base).transpose();
    Eigen::FullPivLU<MatrixXd> lu(m);
    lu.setThreshold(1e-12);
    if (lu.dimensionOfKernel() != 1) return false;
    VectorXd n = lu.kernel().col(0);
    double len = n.norm();
    if (len < 1e-300) return false;
    n /= len;
    double off = n.dot(base);
    if (interior.dot(n) > off) {
        n = -n;
        off = -off;
    }
    f.normal = std::move(n);
    f.offset = off;
    return true;
}

} // namespace

HullVolume convex_hull_volume(const std::vector<std::vector<double>>& raw, int dim) {
    if (dim < 1) throw std::invalid_argument("hull dimension must be >= 1");
    for (const auto& p : raw)
        if (static_cast<int>(p.size()) != dim)
            throw std::invalid_argument("point dimensionality mismatch");

    // Deduplicate: coincident points carry no hull information.
    std::vector<VectorXd> pts;
    for (const auto& p : raw) {
        VectorXd v = Eigen::Map<const VectorXd>(p.data(), dim);
        bool dup = false;
        for (const auto& q : pts) {
            if ((v - q).lpNorm<Eigen::Infinity>() < 1e-12) {
                dup = true;
                break;
            }
        }
        if (!dup) pts.push_back(std::move(v));
    }

    const int n = static_cast<int>(pts.size());
    if (n < dim + 1) return {0.0, true};

    double scale = 0.0;
    for (int k = 0; k < dim; ++k) {
        double lo = pts[0][k], hi = pts[0][k];
        for (const auto& p : pts) {
            lo = std::min(lo, p[k]);
            hi = std::max(hi, p[k]);
        }
        scale = std::max(scale, hi - lo);
    }
    if (scale <= 0.0) return {0.0, true};
    const double eps_vis = 1e-10 * scale;
    const double tol_rank = 1e-9 * scale;

    // Greedy initial simplex: repeatedly take the point farthest from the
    // affine hull of the current selection.
    std::vector<int> simplex{0};
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    chosen[0] = true;
    MatrixXd basis(dim, 0); // orthonormal directions of the affine hull
    while (static_cast<int>(simplex.size()) < dim + 1) {
        int best = -1;
        double best_dist = tol_rank;
        VectorXd best_residual;
        for (int i = 0; i < n; ++i) {
            if (chosen[static_cast<std::size_t>(i)]) continue;
            VectorXd r = pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(simplex[0])];
            if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
            const double dist = r.norm();
            if (dist > best_dist) {
                best_dist = dist;
                best = i;
                best_residual = r;
            }
        }
        if (best < 0) return {0.0, true}; // affinely dependent set
        simplex.push_back(best);
        chosen[static_cast<std::size_t>(best)] = true;
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = best_residual / best_dist;
    }

    VectorXd interior = VectorXd::Zero(dim);
    for (int id : simplex) interior += pts[static_cast<std::size_t>(id)];
    interior /= static_cast<double>(dim + 1);

    double volume = simplex_volume(pts, simplex, dim);

    std::vector<Facet> facets;
    for (int omit = 0; omit <= dim; ++omit) {
        Facet f;
        for (int i = 0; i <= dim; ++i)
            if (i != omit) f.vertices.push_back(simplex[static_cast<std::size_t>(i)]);
        std::sort(f.vertices.begin(), f.vertices.end());
        if (!facet_plane(pts, f, interior, dim))
            throw std::logic_error("initial simplex facet degenerate");
        facets.push_back(std::move(f));
    }

    for (int p = 0; p < n; ++p) {
        if (chosen[static_cast<std::size_t>(p)]) continue;
        const VectorXd& point = pts[static_cast<std::size_t>(p)];

        std::vector<std::size_t> visible;
        for (std::size_t fi = 0; fi < facets.size(); ++fi) {
            if (!facets[fi].alive) continue;
            if (facets[fi].normal.dot(point) - facets[fi].offset > eps_vis) visible.push_back(fi);
        }
        if (visible.empty()) continue; // inside or on the boundary

        // Pyramid volumes over the visible facets equal the hull growth.
        for (std::size_t fi : visible) {
            std::vector<int> ids = facets[fi].vertices;
            ids.insert(ids.begin(), p);
            volume += simplex_volume(pts, ids, dim);
        }

        // Horizon ridges appear in exactly one visible facet.
        std::map<std::vector<int>, int> ridge_count;
        for (std::size_t fi : visible) {
            const auto& vs = facets[fi].vertices;
            for (std::size_t omit = 0; omit < vs.size(); ++omit) {
                std::vector<int> ridge;
                for (std::size_t i = 0; i < vs.size(); ++i)
                    if (i != omit) ridge.push_back(vs[i]);
                ++ridge_count[ridge];
            }
        }
        for (std::size_t fi : visible) facets[fi].alive = false;

        for (const auto& [ridge, count] : ridge_count) {
            if (count != 1) continue;
            Facet f;
            f.vertices = ridge;
            f.vertices.push_back(p);
            std::sort(f.vertices.begin(), f.vertices.end());
            if (facet_plane(pts, f, interior, dim)) facets.push_back(std::move(f));
        }
    }

    return {volume, false};
}

} // namespace quare::geometry
