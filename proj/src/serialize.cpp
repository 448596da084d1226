#include "hybridsim/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "hybridsim/errors.hpp"

namespace hybridsim {

json matrix_to_json(const cmat& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      entries.push_back({m(i, k).real(), m(i, k).imag()});
  j["entries"] = std::move(entries);
  return j;
}

cmat matrix_from_json(const json& j) {
  const Eigen::Index r = j.at("rows").get<Eigen::Index>();
  const Eigen::Index c = j.at("cols").get<Eigen::Index>();
  const auto& entries = j.at("entries");
  if (static_cast<Eigen::Index>(entries.size()) != r * c)
    throw IoError("matrix entry count does not match its shape");
  cmat m(r, c);
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k, ++n)
      m(i, k) = cplx(entries[n][0].get<double>(), entries[n][1].get<double>());
  return m;
}

json rmatrix_to_json(const rmat& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) entries.push_back(m(i, k));
  j["entries"] = std::move(entries);
  return j;
}

rmat rmatrix_from_json(const json& j) {
  const Eigen::Index r = j.at("rows").get<Eigen::Index>();
  const Eigen::Index c = j.at("cols").get<Eigen::Index>();
  const auto& entries = j.at("entries");
  if (static_cast<Eigen::Index>(entries.size()) != r * c)
    throw IoError("matrix entry count does not match its shape");
  rmat m(r, c);
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k, ++n) m(i, k) = entries[n].get<double>();
  return m;
}

json grid_to_json(const GridSpec& g) {
  json j;
  j["dims"] = g.dims;
  j["origin"] = g.origin;
  j["spacing"] = g.spacing;
  j["periodic"] = g.periodic;
  return j;
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.dims = j.at("dims").get<std::vector<int>>();
  g.origin = j.at("origin").get<std::vector<double>>();
  g.spacing = j.at("spacing").get<std::vector<double>>();
  g.periodic = j.at("periodic").get<std::vector<bool>>();
  if (g.origin.size() != g.dims.size() || g.spacing.size() != g.dims.size() ||
      g.periodic.size() != g.dims.size())
    throw IoError("grid axis lists disagree in length");
  return g;
}

json state_to_json(const HybridStateDiscrete& s) {
  json j;
  json points = json::array();
  for (int i = 0; i < s.num_points(); ++i) points.push_back(i);
  j["points"] = std::move(points);
  j["dim"] = s.dim;
  json blocks = json::array();
  for (const auto& b : s.blocks) blocks.push_back(matrix_to_json(b));
  j["blocks"] = std::move(blocks);
  return j;
}

HybridStateDiscrete discrete_state_from_json(const json& j) {
  HybridStateDiscrete s;
  s.dim = j.at("dim").get<int>();
  for (const auto& b : j.at("blocks")) s.blocks.push_back(matrix_from_json(b));
  for (const auto& b : s.blocks)
    if (b.rows() != s.dim || b.cols() != s.dim)
      throw IoError("state block has the wrong dimension");
  return s;
}

json state_to_json(const HybridStateGrid& s) {
  json j;
  j["grid"] = grid_to_json(s.grid);
  j["dim"] = s.dim;
  json blocks = json::array();
  for (int i = 0; i < s.grid.num_nodes(); ++i)
    blocks.push_back(matrix_to_json(s.block(i)));
  j["blocks"] = std::move(blocks);
  return j;
}

HybridStateGrid grid_state_from_json(const json& j) {
  const GridSpec g = grid_from_json(j.at("grid"));
  HybridStateGrid s = HybridStateGrid::zero(g, j.at("dim").get<int>());
  const auto& blocks = j.at("blocks");
  if (static_cast<int>(blocks.size()) != g.num_nodes())
    throw IoError("grid state block count does not match the grid");
  for (int i = 0; i < g.num_nodes(); ++i)
    s.block(i) = matrix_from_json(blocks[i]);
  return s;
}

json model_to_json(const DiscreteModel& m) {
  json j;
  j["hilbert_dim"] = m.dim;
  json pts = json::array();
  for (int i = 0; i < m.num_points(); ++i) {
    if (!m.coords.empty())
      pts.push_back(m.coords[i]);
    else
      pts.push_back(i);
  }
  j["classical"] = {{"points", std::move(pts)}};
  json H = json::array();
  for (const auto& h : m.H) H.push_back(matrix_to_json(h));
  j["H"] = std::move(H);
  json gens = json::array();
  for (const auto& ch : m.channels) {
    json c;
    c["component"] = ch.component;
    json entries = json::array();
    for (const auto& e : ch.entries) {
      entries.push_back({{"to", e.to},
                         {"from", e.from},
                         {"matrix", matrix_to_json(e.op)}});
    }
    c["entries"] = std::move(entries);
    gens.push_back(std::move(c));
  }
  j["generators"] = std::move(gens);
  return j;
}

DiscreteModel discrete_model_from_json(const json& j) {
  DiscreteModel m;
  m.dim = j.at("hilbert_dim").get<int>();
  const auto& pts = j.at("classical").at("points");
  const int P = static_cast<int>(pts.size());
  for (const auto& p : pts) {
    if (p.is_array())
      m.coords.push_back(p.get<std::vector<double>>());
    else
      m.coords.push_back({p.get<double>()});
  }
  for (const auto& h : j.at("H")) m.H.push_back(matrix_from_json(h));
  if (static_cast<int>(m.H.size()) != P)
    throw IoError("one Hamiltonian per classical point expected");
  for (const auto& c : j.at("generators")) {
    DiscreteChannel ch;
    ch.component = c.value("component", -1);
    for (const auto& e : c.at("entries")) {
      DiscreteGeneratorEntry ge;
      ge.to = e.at("to").get<int>();
      ge.from = e.at("from").get<int>();
      ge.op = matrix_from_json(e.at("matrix"));
      if (ge.to < 0 || ge.to >= P || ge.from < 0 || ge.from >= P)
        throw IoError("generator entry outside the classical point set");
      ch.entries.push_back(std::move(ge));
    }
    m.channels.push_back(std::move(ch));
  }
  return m;
}

json diffusive_model_to_json(const DiffusiveModel& m, const GridSpec& grid) {
  json j;
  j["hilbert_dim"] = m.dim;
  j["classical"] = {{"grid", grid_to_json(grid)}};
  j["channels"] = m.nchannels;
  const int nn = grid.num_nodes();
  json H = json::array(), DQ = json::array(), DC = json::array(),
       G = json::array(), V = json::array();
  json gens = json::array();
  for (int a = 0; a < m.nchannels; ++a) gens.push_back(json::array());
  for (int i = 0; i < nn; ++i) {
    const XCoord x = grid.node_coords(i);
    H.push_back(matrix_to_json(m.H(x)));
    DQ.push_back(matrix_to_json(m.DQ(x)));
    DC.push_back(rmatrix_to_json(m.DC(x)));
    G.push_back(matrix_to_json(m.G(x)));
    const rvec v = m.V(x);
    json vv = json::array();
    for (int n = 0; n < v.size(); ++n) vv.push_back(v(n));
    V.push_back(std::move(vv));
    for (int a = 0; a < m.nchannels; ++a)
      gens[a].push_back(matrix_to_json(m.L(x, a)));
  }
  j["H"] = std::move(H);
  j["generators"] = std::move(gens);
  j["DQ"] = std::move(DQ);
  j["DC"] = std::move(DC);
  j["G"] = std::move(G);
  j["V"] = std::move(V);
  return j;
}

namespace {

// nearest-node lookup for per-node tables
int nearest_node(const GridSpec& g, const XCoord& x) {
  std::vector<int> idx(g.ndim());
  for (int n = 0; n < g.ndim(); ++n) {
    int i = static_cast<int>(std::lround((x[n] - g.origin[n]) / g.spacing[n]));
    if (g.periodic[n]) {
      i %= g.dims[n];
      if (i < 0) i += g.dims[n];
    } else {
      i = std::clamp(i, 0, g.dims[n] - 1);
    }
    idx[n] = i;
  }
  return g.flat_index(idx);
}

}  // namespace

DiffusiveModelFile diffusive_model_from_json(const json& j) {
  DiffusiveModelFile f;
  f.grid = grid_from_json(j.at("classical").at("grid"));
  const int nn = f.grid.num_nodes();
  DiffusiveModel& m = f.model;
  m.dim = j.at("hilbert_dim").get<int>();
  m.nclassical = f.grid.ndim();
  m.nchannels = j.at("channels").get<int>();

  auto H = std::make_shared<std::vector<cmat>>();
  auto DQ = std::make_shared<std::vector<cmat>>();
  auto DC = std::make_shared<std::vector<rmat>>();
  auto G = std::make_shared<std::vector<cmat>>();
  auto V = std::make_shared<std::vector<rvec>>();
  auto L = std::make_shared<std::vector<std::vector<cmat>>>();

  for (const auto& h : j.at("H")) H->push_back(matrix_from_json(h));
  for (const auto& q : j.at("DQ")) DQ->push_back(matrix_from_json(q));
  for (const auto& c : j.at("DC")) DC->push_back(rmatrix_from_json(c));
  for (const auto& g : j.at("G")) G->push_back(matrix_from_json(g));
  for (const auto& v : j.at("V")) {
    rvec vv(v.size());
    for (size_t n = 0; n < v.size(); ++n) vv(n) = v[n].get<double>();
    V->push_back(vv);
  }
  L->resize(m.nchannels);
  const auto& gens = j.at("generators");
  if (static_cast<int>(gens.size()) != m.nchannels)
    throw IoError("generator table count != channels");
  for (int a = 0; a < m.nchannels; ++a)
    for (const auto& g : gens[a]) (*L)[a].push_back(matrix_from_json(g));

  if (static_cast<int>(H->size()) != nn || static_cast<int>(DQ->size()) != nn ||
      static_cast<int>(DC->size()) != nn || static_cast<int>(G->size()) != nn ||
      static_cast<int>(V->size()) != nn)
    throw IoError("per-node tables must cover every grid node");
  for (int a = 0; a < m.nchannels; ++a)
    if (static_cast<int>((*L)[a].size()) != nn)
      throw IoError("per-node generator tables must cover every grid node");

  const GridSpec grid = f.grid;
  m.H = [H, grid](const XCoord& x) { return (*H)[nearest_node(grid, x)]; };
  m.DQ = [DQ, grid](const XCoord& x) { return (*DQ)[nearest_node(grid, x)]; };
  m.DC = [DC, grid](const XCoord& x) { return (*DC)[nearest_node(grid, x)]; };
  m.G = [G, grid](const XCoord& x) { return (*G)[nearest_node(grid, x)]; };
  m.V = [V, grid](const XCoord& x) { return (*V)[nearest_node(grid, x)]; };
  m.L = [L, grid](const XCoord& x, int a) {
    return (*L)[a][nearest_node(grid, x)];
  };

  // constant-coefficient detection enables per-run noise prebuilds
  bool constant = true;
  for (int i = 1; i < nn && constant; ++i) {
    constant = ((*DQ)[i] - (*DQ)[0]).cwiseAbs().maxCoeff() < 1e-14 &&
               ((*DC)[i] - (*DC)[0]).cwiseAbs().maxCoeff() < 1e-14 &&
               ((*G)[i] - (*G)[0]).cwiseAbs().maxCoeff() < 1e-14;
  }
  m.constant_coefficients = constant;
  return f;
}

LoadedModel model_from_json(const json& j) {
  LoadedModel out;
  const auto& cl = j.at("classical");
  if (cl.contains("points"))
    out.discrete = discrete_model_from_json(j);
  else if (cl.contains("grid"))
    out.diffusive = diffusive_model_from_json(j);
  else
    throw IoError("model file needs classical.points or classical.grid");
  return out;
}

LoadedModel load_model_file(const std::string& path) {
  return model_from_json(load_json_file(path));
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("cannot parse " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(1) << "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

}  // namespace hybridsim
