#pragma once

#include <maxshape/fem.hpp>
#include <maxshape/mesh.hpp>

#include <optional>

namespace maxshape {

enum class DeformMode {
    direct,   ///< every node moves by t g(x)
    harmonic, ///< boundary nodes move by t g(x), interior by the harmonic extension
};

/// Either the deformed mesh or the quality report explaining why the
/// deformation was rejected. The report is filled in both cases.
struct DeformResult {
    std::optional<Mesh> mesh;
    MeshQualityReport report;

    bool valid() const { return mesh.has_value(); }
};

/// Componentwise discrete Laplace problem with the boundary values of g as
/// Dirichlet data.
VecField harmonic_extension(const VecField& g);

/// Moves node i to x_i + t d_i; d is used as given.
DeformResult displace_mesh(const Mesh& mesh, const VecField& displacement, double t, const QualityFloors& floors = {});

DeformResult deform_mesh(const Mesh& mesh, const VecField& g, double t, DeformMode mode = DeformMode::harmonic,
                         const QualityFloors& floors = {});

} // namespace maxshape
