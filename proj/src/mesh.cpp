#include "varimin/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace varimin::mesh {

ElementKindInfo element_kind_info(ElementKind kind) {
    switch (kind) {
        case ElementKind::P1Interval:
            return {1, 2, 0, 1, 2};
        case ElementKind::HermiteInterval:
            return {1, 4, 1, 3, 2};
        case ElementKind::P1Triangle:
            return {2, 3, 0, 1, 3};
    }
    throw std::logic_error("unknown element kind");
}

Mesh build_interval_mesh(double half_length, int n_elements) {
    if (half_length <= 0) throw std::invalid_argument("half_length must be positive");
    if (n_elements < 1) throw std::invalid_argument("n_elements must be at least 1");
    Mesh m;
    m.dim = 1;
    const double h = 2.0 * half_length / n_elements;
    for (int i = 0; i <= n_elements; ++i)
        m.vertices.push_back({i * h - half_length, 0.0});
    for (int e = 0; e < n_elements; ++e) m.elements.push_back({e, e + 1});
    m.boundary_vertices = {0, n_elements};
    m.h = h;
    return m;
}

Mesh build_rect_mesh(double lx, double ly, int k) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (lx <= 0 || ly <= 0) throw std::invalid_argument("domain half-lengths must be positive");
    Mesh m;
    m.dim = 2;
    const double dx = 2.0 * lx / k;
    const double dy = 2.0 * ly / k;
    auto vid = [k](int i, int j) { return j * (k + 1) + i; };
    for (int j = 0; j <= k; ++j)
        for (int i = 0; i <= k; ++i) {
            m.vertices.push_back({i * dx - lx, j * dy - ly});
            if (i == 0 || i == k || j == 0 || j == k) m.boundary_vertices.insert(vid(i, j));
        }
    // Same diagonal in every cell: split (i,j)-(i+1,j)-(i+1,j+1)-(i,j+1)
    // along the (i,j)-(i+1,j+1) diagonal.
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) {
            m.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            m.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    m.h = 0.0;
    for (int e = 0; e < static_cast<int>(m.elements.size()); ++e)
        m.h = std::max(m.h, element_diameter(m, e));
    return m;
}

double element_diameter(const Mesh& m, int e) {
    const auto& el = m.elements.at(static_cast<std::size_t>(e));
    double d = 0.0;
    for (std::size_t a = 0; a < el.size(); ++a)
        for (std::size_t b = a + 1; b < el.size(); ++b) {
            double ddx = m.vertices[el[a]][0] - m.vertices[el[b]][0];
            double ddy = m.vertices[el[a]][1] - m.vertices[el[b]][1];
            d = std::max(d, std::hypot(ddx, ddy));
        }
    return d;
}

ReferenceBasis reference_basis(ElementKind kind) {
    using poly::Polynomial;
    const Polynomial t = Polynomial::variable(kRefT);
    const Polynomial s = Polynomial::variable(kRefS);
    const Polynomial one(1.0);
    ReferenceBasis b;
    switch (kind) {
        case ElementKind::P1Interval:
            b.functions = {one - t, t};
            b.length_scaling_power = {0, 0};
            break;
        case ElementKind::HermiteInterval: {
            Polynomial t2 = t * t;
            Polynomial t3 = t2 * t;
            b.functions = {
                t3 * 2.0 - t2 * 3.0 + one,  // value at t=0
                t3 - t2 * 2.0 + t,          // slope at t=0
                t3 * (-2.0) + t2 * 3.0,     // value at t=1
                t3 - t2,                    // slope at t=1
            };
            b.length_scaling_power = {0, 1, 0, 1};
            break;
        }
        case ElementKind::P1Triangle:
            b.functions = {one - s - t, s, t};
            b.length_scaling_power = {0, 0, 0};
            break;
    }
    return b;
}

}  // namespace varimin::mesh
