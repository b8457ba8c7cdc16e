//! Standard presentations.

use crate::algebra::AlgebraPresentation;

/// `H_{S^1}(S^2) = k[x, u]/(x^2 - u^2)` over `R = k[u]`, with `x -> -u`.
pub fn s2_circle() -> AlgebraPresentation {
    AlgebraPresentation::builder("H")
        .generator("u", 2)
        .generator("x", 2)
        .r_generator("u")
        .relation("x^2 - u^2")
        .augment("x", "-u")
        .build()
        .expect("valid presentation")
}

/// `R = k[u]` as an algebra over itself (the point).
pub fn point() -> AlgebraPresentation {
    AlgebraPresentation::builder("R")
        .generator("u", 2)
        .r_generator("u")
        .build()
        .expect("valid presentation")
}

/// `H(S^2) = k[x]/(x^2)` over `k`.
pub fn sphere() -> AlgebraPresentation {
    AlgebraPresentation::builder("S2")
        .generator("x", 2)
        .relation("x^2")
        .build()
        .expect("valid presentation")
}

/// `⋀(u, x, y)` with `dy = u x`, `deg x = 1`, `deg u = deg y = 2`.
pub fn lambda_uxy() -> AlgebraPresentation {
    AlgebraPresentation::builder("M")
        .generator("u", 2)
        .generator("x", 1)
        .generator("y", 2)
        .differential("y", "u*x")
        .build()
        .expect("valid presentation")
}

/// `⋀(e1) ⊗ k[e2]` with zero differential.
pub fn loop_sphere_model() -> AlgebraPresentation {
    AlgebraPresentation::builder("L")
        .generator("e1", 1)
        .generator("e2", 2)
        .build()
        .expect("valid presentation")
}
