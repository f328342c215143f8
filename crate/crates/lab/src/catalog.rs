/// `(name, description, anchor)` for every built-in scenario.
pub const CATALOG: &[(&str, &str, &str)] = &[
    (
        "constants",
        "scaling exponents, Sobolev and Joseph-Lundgren exponents, singular steady coefficients",
        "scaling law u -> R^-α u(x/R, t/R^2); steady state c|x|^-α",
    ),
    (
        "morrey",
        "centered and off-center L^(q,λ) Morrey norm of the initial profile",
        "Morrey space L^(2,λ), λ = 2α",
    ),
    (
        "decay",
        "t^(λ/4) sup|S_t f| and the Morrey norm of S_t f along the heat semigroup",
        "heat semigroup smoothing bound in L^(2,λ)",
    ),
    (
        "simulate",
        "semi-implicit flow with adaptive steps and the blow-up report",
        "Lane-Emden heat flow u_t - Δu = |u|^(p-2)u, Dirichlet data",
    ),
    (
        "picard",
        "fixed-point iteration of the Duhamel map with contraction diagnostics",
        "mild solution u = S_t u0 + ∫ S_(t-s)|u|^(p-2)u ds in L^(p,μ)",
    ),
    (
        "scan-eps",
        "bisection on the amplitude for convergence of the fixed-point iteration",
        "small-data threshold ε_0 in L^(2,λ)",
    ),
    (
        "ball-blowup",
        "negative-energy bubble: blow-up time against the L^2 differential-inequality bound",
        "Ball's criterion, energy E = ∫ |∇u|^2/2 - |u|^p/p",
    ),
    (
        "scaling",
        "flow on B_1 against the rescaled flow on B_R",
        "scaling law u -> R^-α u(x/R, t/R^2)",
    ),
    (
        "minimal",
        "truncated levels, monotonicity, Duhamel consistency and blow-up classification",
        "minimal solution as the limit of min(u^(p-1), n^(p-1)) truncations",
    ),
    (
        "scan-m",
        "classification of c|x|^-α across amplitudes against the steady coefficients",
        "instantaneous complete blow-up above the singular steady state",
    ),
];

pub fn render() -> String {
    let mut s = String::new();
    for (name, desc, anchor) in CATALOG {
        s.push_str(&format!("{name:<12} {desc}\n{:<12} anchor: {anchor}\n", ""));
    }
    s
}
