#include <maxshape/deform.hpp>
#include <maxshape/errors.hpp>

namespace maxshape {

VecField harmonic_extension(const VecField& g)
{
    const Mesh& mesh = *g.mesh;
    const int n = mesh.num_nodes();
    const auto& boundary = mesh.boundary();
    const FactoredOperator laplace(assemble_operator(mesh, 1.0, 0.0), boundary);

    Vector out(2 * n);
    const Vector zero = Vector::Zero(n);
    for (int comp = 0; comp < 2; ++comp) {
        Vector values(boundary.size());
        for (std::size_t j = 0; j < boundary.size(); ++j) values[j] = g.coeffs[2 * boundary[j] + comp];
        const Vector x = laplace.solve(zero, values);
        for (int i = 0; i < n; ++i) out[2 * i + comp] = x[i];
    }
    return VecField(g.mesh, std::move(out));
}

DeformResult displace_mesh(const Mesh& mesh, const VecField& displacement, double t, const QualityFloors& floors)
{
    if (t < 0.0) throw GeometryError("deformation step must be nonnegative");
    if (displacement.coeffs.size() != 2 * mesh.num_nodes()) throw GeometryError("displacement defined on another mesh");

    std::vector<Point> nodes = mesh.nodes();
    if (t != 0.0) {
        for (int i = 0; i < mesh.num_nodes(); ++i) nodes[i] += t * displacement.at_node(i);
    }
    DeformResult result;
    result.report = assess_quality(nodes, mesh.triangles(), mesh.boundary(), floors);
    if (result.report.is_valid) result.mesh.emplace(mesh.with_nodes(std::move(nodes)));
    return result;
}

DeformResult deform_mesh(const Mesh& mesh, const VecField& g, double t, DeformMode mode, const QualityFloors& floors)
{
    if (g.coeffs.size() != 2 * mesh.num_nodes()) throw GeometryError("field defined on another mesh");
    if (mode == DeformMode::direct || t == 0.0) return displace_mesh(mesh, g, t, floors);
    return displace_mesh(mesh, harmonic_extension(g), t, floors);
}

} // namespace maxshape
