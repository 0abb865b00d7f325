#pragma once

#include "owns/system.hpp"

namespace owns {

// ===== built-in desk-scale testbeds =====
//
// (a) linearized Euler about uniform flow (2D and 3D), analytic characteristic
//     transform so repeated eigenvalues never go through a numeric eigensolver;
// (b) 2D linearized Euler about a parallel tanh shear profile
//     u(y) = u0 + du * tanh(y / delta) with uniform sound speed.

struct UniformEuler2D {
    double u = 0.5;          // base streamwise velocity
    double a = 1.0;          // sound speed
    double rho = 1.0;        // base density
    int nodes = 8;
    double span_lo = 0.0;
    double span_hi = 6.283185307179586;
    int scheme_order = 4;
    BoundaryKind bc = BoundaryKind::Periodic;
};

struct UniformEuler3D {
    double u = 0.5;
    double a = 1.0;
    double rho = 1.0;
    int nodes = 8;
    double span_lo = 0.0;
    double span_hi = 6.283185307179586;
    int scheme_order = 4;
    BoundaryKind bc = BoundaryKind::Periodic;
    // the z direction is handled spectrally; pass omega_t = {omega_z} at assembly
};

struct ShearLayer2D {
    double u0 = 0.5;         // mean velocity
    double du = 0.15;        // tanh amplitude; u(y) in (u0-du, u0+du)
    double delta = 0.8;      // shear thickness
    double a = 1.0;
    double rho = 1.0;
    int nodes = 16;
    double span_lo = -3.0;
    double span_hi = 3.0;
    int scheme_order = 4;
    BoundaryKind bc = BoundaryKind::ZeroDirichlet;
};

/// Flux matrices of 2D linearized Euler, vars (rho, u, v, p).
HyperbolicSystem euler2d_system(double u, double a, double rho);

/// Flux matrices of 3D linearized Euler, vars (rho, u, v, w, p).
HyperbolicSystem euler3d_system(double u, double a, double rho);

/// Analytic characteristic form of euler2d_system (rows sorted per convention).
CharacteristicForm euler2d_characteristic(double u, double a, double rho);
CharacteristicForm euler3d_characteristic(double u, double a, double rho);

OperatorBuilder make_uniform_euler_2d(const UniformEuler2D& p);
OperatorBuilder make_uniform_euler_3d(const UniformEuler3D& p, std::vector<double> omega_t);
OperatorBuilder make_shear_layer_2d(const ShearLayer2D& p);

}  // namespace owns
