#pragma once

#include <random>

#include "elastomodes/assembly.hpp"
#include "elastomodes/material.hpp"
#include "elastomodes/mesh.hpp"
#include "oracles.hpp"

namespace fixture {

struct Problem {
    elastomodes::Mesh mesh;
    elastomodes::MaterialField field;
    elastomodes::DofMap dofs;
    elastomodes::SymSparse k;
    elastomodes::SymSparse m;

    Problem(elastomodes::Mesh mesh_in, elastomodes::MaterialField field_in)
        : mesh(std::move(mesh_in)), field(std::move(field_in)), dofs(mesh), k(assemble_stiffness(mesh, field, dofs)),
          m(assemble_mass(mesh, field, dofs))
    {
    }
};

/// Jittered box with random anisotropic tensors and densities per element.
inline Problem heterogeneous(int nx, int ny, int nz, std::uint64_t seed, const char* planes = "x0")
{
    std::mt19937_64 rng(seed);
    auto mesh = oracle::jittered(
        elastomodes::generate_box(nx, ny, nz, 1.0 * nx / 2, 1.0 * ny / 2, 1.0 * nz / 2,
                                  elastomodes::DirichletPlanes::parse(planes)),
        0.06, rng);
    std::uniform_real_distribution<double> rho(0.5, 2.0);
    elastomodes::MaterialField field;
    for (std::size_t e = 0; e < mesh.num_tets(); ++e) {
        field.tensors.push_back(elastomodes::ElasticTensord::from_full_tensor(oracle::random_spd_tensor(rng)));
        field.densities.push_back(rho(rng));
    }
    return Problem(std::move(mesh), std::move(field));
}

/// Fixed-free rod along x, nu = 0, E = 1, rho = 1.
inline Problem rod(int nx, int nyz, double length, double width)
{
    auto mesh = elastomodes::generate_box(nx, nyz, nyz, length, width, width, elastomodes::DirichletPlanes::parse("x0"));
    auto field = elastomodes::MaterialField::uniform(mesh.num_tets(), elastomodes::ElasticTensord::isotropic(0.0, 0.5),
                                                     1.0);
    return Problem(std::move(mesh), std::move(field));
}

} // namespace fixture
