#include "hybridsim/models.hpp"

#include <cmath>

#include "hybridsim/errors.hpp"

namespace hybridsim {

DiffusiveModel build_two_level(double G) {
  DiffusiveModel m;
  m.dim = 2;
  m.nclassical = 1;
  m.nchannels = 1;
  m.constant_coefficients = true;
  const cmat z = pauli(3);
  m.H = [](const XCoord&) { return cmat::Zero(2, 2); };
  m.L = [z](const XCoord&, int) { return z; };
  m.DQ = [](const XCoord&) { return cmat::Identity(1, 1); };
  m.DC = [](const XCoord&) { return rmat::Identity(1, 1); };
  m.G = [G](const XCoord&) {
    cmat g(1, 1);
    g(0, 0) = G;
    return g;
  };
  m.V = [](const XCoord&) { return rvec::Zero(1); };
  return m;
}

double bloch_rate_on_circle(double G, double x) {
  const double c = std::cos(x);
  return -4.0 * c * c - 4.0 * G * c - 1.0;
}

OscillatorOps truncate_oscillator(int n_max) {
  if (n_max < 2) throw Error("truncate_oscillator: n_max must be >= 2");
  cmat a = cmat::Zero(n_max, n_max);
  for (int n = 1; n < n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
  OscillatorOps ops;
  ops.Q = (a + a.adjoint()) / std::sqrt(2.0);
  ops.P = (a - a.adjoint()) / (std::sqrt(2.0) * kI);
  return ops;
}

DiffusiveModel build_canonical(const CanonicalSpecification& spec) {
  const int A = static_cast<int>(spec.L.size());
  const int d = static_cast<int>(spec.HQ.rows());
  for (const auto& l : spec.L)
    if (!is_hermitian(l, 1e-10))
      throw NonHermitianInput("canonical coupling operators must be Hermitian");
  if (!is_hermitian(spec.DQ, 1e-10))
    throw NonHermitianInput("DQ must be Hermitian");

  // probe the classical dimension from the gradient shape
  const rmat g0 = spec.grad_h(XCoord(2, 0.0));
  const int N = static_cast<int>(g0.rows());
  if (static_cast<int>(g0.cols()) != A)
    throw ShapeMismatch("grad_h must be N x A");

  auto Gfun = canonical_backaction(spec.grad_h, N);

  DiffusiveModel m;
  m.dim = d;
  m.nclassical = N;
  m.nchannels = A;

  const cmat HQ = spec.HQ;
  auto h = spec.h;
  auto Hcl = spec.H_cl;
  std::vector<cmat> L = spec.L;
  m.H = [HQ, h, Hcl, L, d](const XCoord& x) {
    cmat out = HQ + Hcl(x) * cmat::Identity(d, d);
    const rvec hx = h(x);
    for (size_t a = 0; a < L.size(); ++a) out += hx(a) * L[a];
    return out;
  };
  m.L = [L](const XCoord&, int a) { return L[a]; };
  const cmat DQ = spec.DQ;
  m.DQ = [DQ](const XCoord&) { return DQ; };
  m.G = Gfun;

  if (spec.mode == CanonicalNoiseMode::MinimumNoise) {
    const cmat DQp = pseudo_inverse(DQ, 1e-10);
    // minimum noise requires the backaction to live inside the range of DQ
    // and to exhaust it
    const cmat G_probe = Gfun(XCoord(N, 0.0));
    const double scale = std::max(1.0, G_probe.cwiseAbs().maxCoeff());
    if ((G_probe * DQp * DQ - G_probe).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw RankDeficiency(
          "no minimum-noise diffusion exists: backaction leaves the "
          "decoherence range");
    m.DC = [Gfun, DQp](const XCoord& x) {
      const cmat G = Gfun(x);
      return rmat((G * DQp * G.adjoint()).real());
    };
  } else {
    const rmat DC = spec.DC_explicit;
    m.DC = [DC](const XCoord&) { return DC; };
  }

  auto gradHcl = spec.grad_H_cl;
  const int half = N / 2;
  m.V = [gradHcl, half, N](const XCoord& x) {
    const rvec g = gradHcl(x);
    rvec v(N);
    for (int n = 0; n < half; ++n) {
      v(n) = g(n + half);       // dq/dt = +dH/dp
      v(n + half) = -g(n);      // dp/dt = -dH/dq
    }
    return v;
  };
  // DQ and G are x-independent whenever grad_h is; probe two points
  const cmat g1 = spec.grad_h(XCoord(N, 0.37));
  m.constant_coefficients = (g1 - g0).cwiseAbs().maxCoeff() < 1e-14;
  return m;
}

DiffusiveModel build_oscillator_pair(double g, const cmat& DQ, int n_max) {
  OscillatorOps ops = truncate_oscillator(n_max);
  CanonicalSpecification spec;
  spec.HQ = 0.5 * (ops.Q * ops.Q + ops.P * ops.P);
  spec.H_cl = [](const XCoord& x) {
    return 0.5 * (x[0] * x[0] + x[1] * x[1]);
  };
  spec.grad_H_cl = [](const XCoord& x) {
    rvec v(2);
    v << x[0], x[1];
    return v;
  };
  spec.h = [g](const XCoord& x) {
    rvec v(2);
    v << g * x[0], g * x[1];
    return v;
  };
  spec.grad_h = [g](const XCoord&) { return rmat(g * rmat::Identity(2, 2)); };
  spec.L = {ops.Q, ops.P};
  spec.DQ = DQ;
  spec.mode = CanonicalNoiseMode::MinimumNoise;
  return build_canonical(spec);
}

Preset parse_preset(const std::string& text) {
  auto fail = [&] {
    throw Error("unknown model preset: " + text);
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail();
  const std::string kind = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);

  auto parse_kv = [&](const std::string& s) {
    std::vector<std::pair<std::string, double>> kv;
    size_t pos = 0;
    while (pos < s.size()) {
      size_t comma = s.find(',', pos);
      if (comma == std::string::npos) comma = s.size();
      const std::string item = s.substr(pos, comma - pos);
      const size_t eq = item.find('=');
      if (eq == std::string::npos) fail();
      kv.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
      pos = comma + 1;
    }
    return kv;
  };

  Preset p;
  p.name = text;
  if (kind == "two-level") {
    double G = 0.0;
    bool seen = false;
    for (auto& [k, v] : parse_kv(rest)) {
      if (k == "G" || k == "g") {
        G = v;
        seen = true;
      } else {
        fail();
      }
    }
    if (!seen) fail();
    p.model = build_two_level(G);
    return p;
  }
  if (kind == "oscillator") {
    double g = 0.0, dq = 1.0;
    int nmax = 20;
    for (auto& [k, v] : parse_kv(rest)) {
      if (k == "g")
        g = v;
      else if (k == "dq")
        dq = v;
      else if (k == "nmax")
        nmax = static_cast<int>(v);
      else
        fail();
    }
    p.model =
        build_oscillator_pair(g, cmat(dq * cmat::Identity(2, 2)), nmax);
    return p;
  }
  fail();
  return p;  // unreachable
}

}  // namespace hybridsim
