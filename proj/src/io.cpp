#include "qmn/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qmn::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::Parse, what); }

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) parse_error(where + ": missing \"" + key + "\"");
  return j.at(key);
}

std::string as_string(const Json& j, const std::string& what) {
  if (!j.is_string()) parse_error(what + " must be a string");
  return j.get<std::string>();
}

double as_number(const Json& j, const std::string& what) {
  if (!j.is_number()) parse_error(what + " must be a number");
  return j.get<double>();
}

}  // namespace

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    parse_error("'" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) parse_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

QuiverSpec quiver_spec_from_json(const Json& j) {
  QuiverSpec spec;
  const auto& vertices = require(j, "vertices", "quiver");
  if (!vertices.is_array()) parse_error("quiver: \"vertices\" must be a list");
  for (const auto& v : vertices) spec.vertices.push_back(as_string(v, "vertex id"));
  const auto& arrows = require(j, "arrows", "quiver");
  if (!arrows.is_array()) parse_error("quiver: \"arrows\" must be a list");
  for (const auto& a : arrows)
    spec.arrows.push_back({as_string(require(a, "id", "arrow"), "arrow id"),
                           as_string(require(a, "from", "arrow"), "arrow source"),
                           as_string(require(a, "to", "arrow"), "arrow target")});
  if (j.contains("roles")) {
    if (!j.at("roles").is_object()) parse_error("quiver: \"roles\" must be an object");
    for (const auto& [v, r] : j.at("roles").items()) {
      auto role = parse_role(as_string(r, "role"));
      if (!role) parse_error("quiver: unknown role '" + r.get<std::string>() + "'");
      spec.roles[v] = *role;
    }
  }
  if (j.contains("network")) {
    if (!j.at("network").is_boolean()) parse_error("quiver: \"network\" must be true or false");
    spec.network = j.at("network").get<bool>();
  }
  return spec;
}

QuiverPtr quiver_from_json(const Json& j) { return Quiver::make(quiver_spec_from_json(j)); }

Json to_json(const Quiver& q) {
  Json j;
  j["vertices"] = q.spec().vertices;
  j["arrows"] = Json::array();
  for (const auto& a : q.spec().arrows) j["arrows"].push_back({{"id", a.id}, {"from", a.from}, {"to", a.to}});
  if (!q.spec().roles.empty()) {
    Json roles = Json::object();
    for (const auto& [v, r] : q.spec().roles) roles[v] = to_string(r);
    j["roles"] = roles;
  }
  if (q.is_network()) j["network"] = true;
  return j;
}

QuiverPtr read_quiver(const fs::path& path) {
  const auto j = read_json(path);
  // A representation or network file carries its quiver inline.
  if (j.is_object() && j.contains("quiver") && !j.contains("vertices")) return embedded_quiver(j, path.parent_path());
  return quiver_from_json(j);
}

QuiverPtr read_quiver_or_null(const std::string& path) { return path.empty() ? nullptr : read_quiver(path); }

MatrixXd matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  MatrixXd m(rows, cols);
  auto mismatch = [&](Eigen::Index r, Eigen::Index c) {
    throw Error(ErrorCode::ShapeMismatch, what + " is " + std::to_string(r) + "x" + std::to_string(c) +
                                              ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  };
  if (j.is_number()) {
    if (rows != 1 || cols != 1) mismatch(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array()) parse_error(what + " must be a number or a list");
  const auto n = static_cast<Eigen::Index>(j.size());
  const bool flat = n > 0 && !j.front().is_array();
  if (flat) {
    if (rows == 1 && cols == n) {
      for (Eigen::Index k = 0; k < n; ++k) m(0, k) = as_number(j[k], what);
    } else if (cols == 1 && rows == n) {
      for (Eigen::Index k = 0; k < n; ++k) m(k, 0) = as_number(j[k], what);
    } else {
      mismatch(1, n);
    }
    return m;
  }
  for (const auto& row : j)
    if (!row.is_array() || row.size() != j.front().size()) parse_error(what + ": rows must be lists of equal length");
  if (n != rows) mismatch(n, n ? static_cast<Eigen::Index>(j.front().size()) : 0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (static_cast<Eigen::Index>(row.size()) != cols) mismatch(rows, static_cast<Eigen::Index>(row.size()));
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = as_number(row[c], what);
  }
  return m;
}

Json to_json(const MatrixXd& m) {
  if (m.rows() == 1 && m.cols() == 1) return m(0, 0);
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

Json to_json(const VectorXd& v) {
  Json j = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v(k));
  return j;
}

QuiverPtr embedded_quiver(const Json& j, const fs::path& base) {
  const auto& q = require(j, "quiver", "representation");
  if (q.is_object()) return quiver_from_json(q);
  if (q.is_string()) {
    fs::path p = q.get<std::string>();
    if (p.is_relative()) p = base / p;
    return read_quiver(p);
  }
  parse_error("\"quiver\" must be an object or a file path");
}

Representation<double> rep_from_json(const Json& j, QuiverPtr q) {
  std::vector<int> dims(q->vertex_count(), 1);
  if (j.contains("dims")) {
    if (!j.at("dims").is_object()) parse_error("\"dims\" must be an object");
    for (const auto& [v, d] : j.at("dims").items()) {
      auto idx = q->find_vertex(v);
      if (!idx) parse_error("dims: unknown vertex '" + v + "'");
      if (!d.is_number_integer() || d.get<long>() < 0) parse_error("dims: '" + v + "' needs a nonnegative integer");
      dims[*idx] = d.get<int>();
    }
  }
  auto r = zero_representation<double>(q, DimensionVector(dims));
  const auto& weights = require(j, "weights", "representation");
  if (!weights.is_object()) parse_error("\"weights\" must be an object");
  for (const auto& [id, w] : weights.items())
    if (!q->find_arrow(id)) parse_error("weights: unknown arrow '" + id + "'");
  for (std::size_t a = 0; a < q->arrow_count(); ++a) {
    const auto& arrow = q->arrow(a);
    if (!weights.contains(arrow.id)) parse_error("weights: arrow '" + arrow.id + "' has no weight");
    r.maps[a] = matrix_from_json(weights.at(arrow.id), r.dims[arrow.target], r.dims[arrow.source],
                                 "weight of '" + arrow.id + "'");
  }
  return r;
}

RepFile read_rep(const fs::path& path, QuiverPtr q) {
  const auto j = read_json(path);
  if (!q) q = embedded_quiver(j, path.parent_path());
  auto rep = rep_from_json(j, q);
  return {q, std::move(rep)};
}

Json to_json(const Representation<double>& r, bool embed_quiver) {
  const auto& q = *r.quiver;
  Json j;
  if (embed_quiver) j["quiver"] = to_json(q);
  Json dims = Json::object();
  for (std::size_t v = 0; v < q.vertex_count(); ++v) dims[q.vertex(v)] = r.dims[v];
  j["dims"] = dims;
  Json weights = Json::object();
  for (std::size_t a = 0; a < q.arrow_count(); ++a) weights[q.arrow(a).id] = to_json(r.maps[a]);
  j["weights"] = weights;
  return j;
}

Json to_json(const ThinRep<double>& r, bool embed_quiver) { return to_json(to_representation(r), embed_quiver); }

NeuralNetwork network_from_json(const Json& j, QuiverPtr q) {
  if (j.contains("bias")) {
    const auto& bias = j.at("bias");
    if (!bias.is_array()) parse_error("\"bias\" must be a list of vertices");
    auto spec = q->spec();
    for (const auto& b : bias) {
      const auto v = as_string(b, "bias vertex");
      if (!q->find_vertex(v)) parse_error("bias: unknown vertex '" + v + "'");
      spec.roles[v] = Role::Bias;
    }
    q = Quiver::make(std::move(spec));
  }
  auto rep = rep_from_json(j, q);
  std::vector<Activation> act(q->vertex_count(), Activation::Identity);
  if (j.contains("activations")) {
    if (!j.at("activations").is_object()) parse_error("\"activations\" must be an object");
    for (const auto& [v, tag] : j.at("activations").items()) {
      auto idx = q->find_vertex(v);
      if (!idx) parse_error("activations: unknown vertex '" + v + "'");
      auto f = parse_activation(as_string(tag, "activation"));
      if (!f) parse_error("activations: unknown tag '" + tag.get<std::string>() + "'");
      act[*idx] = *f;
    }
  }
  return NeuralNetwork(to_thin(rep), std::move(act));
}

NeuralNetwork read_network(const fs::path& path, QuiverPtr q) {
  const auto j = read_json(path);
  if (!q) q = embedded_quiver(j, path.parent_path());
  return network_from_json(j, q);
}

Json to_json(const NeuralNetwork& n, bool embed_quiver) {
  auto j = to_json(n.weights(), embed_quiver);
  const auto& q = n.quiver();
  Json act = Json::object();
  for (auto v : q.hidden().vertices) act[q.vertex(v)] = to_string(n.activation(v));
  j["activations"] = act;
  Json bias = Json::array();
  for (auto b : n.biases()) bias.push_back(q.vertex(b));
  j["bias"] = bias;
  return j;
}

Json to_json(const ModuliPoint<double>& m) {
  const auto& q = *m.quiver;
  Json blocks = Json::array();
  for (std::size_t k = 0; k < m.paths.size(); ++k) {
    const auto& p = m.paths[k];
    Json arrows = Json::array();
    for (auto a : p.arrows) arrows.push_back(q.arrow(a).id);
    blocks.push_back({{"path", path_label(q, p)},
                      {"from", q.vertex(q.hidden().vertices[p.start])},
                      {"to", q.vertex(q.hidden().vertices[p.end])},
                      {"arrows", arrows},
                      {"block", to_json(m.blocks[k])}});
  }
  for (std::size_t k = 0; k < m.direct.size(); ++k) {
    const auto& arrow = q.arrow(m.direct[k]);
    blocks.push_back({{"path", arrow.id},
                      {"from", q.vertex(arrow.source)},
                      {"to", q.vertex(arrow.target)},
                      {"arrows", Json::array({arrow.id})},
                      {"block", to_json(m.direct_blocks[k])}});
  }
  return blocks;
}

Json to_json(const GradientRep& g) {
  const auto& q = *g.quiver;
  Json dw = Json::object();
  for (std::size_t a = 0; a < q.arrow_count(); ++a) dw[q.arrow(a).id] = g.dw(static_cast<Eigen::Index>(a));
  Json da = Json::object();
  for (std::size_t v = 0; v < q.vertex_count(); ++v) da[q.vertex(v)] = g.da(static_cast<Eigen::Index>(v));
  return {{"dW", dw}, {"da", da}};
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return cells;
}

bool parse_cell(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

}  // namespace

Dataset parse_csv(std::istream& in, std::size_t inputs, std::size_t outputs) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_row(line);
    std::vector<double> values;
    bool numeric = true;
    for (const auto& c : cells) {
      double x;
      if (!parse_cell(c, x)) {
        numeric = false;
        break;
      }
      values.push_back(x);
    }
    if (!numeric) {
      if (data.empty() && line_no == 1) continue;
      parse_error("data line " + std::to_string(line_no) + " is not numeric");
    }
    if (values.size() != inputs + outputs)
      parse_error("data line " + std::to_string(line_no) + " has " + std::to_string(values.size()) +
                  " columns, expected " + std::to_string(inputs + outputs));
    Sample s{VectorXd(static_cast<Eigen::Index>(inputs)), VectorXd(static_cast<Eigen::Index>(outputs))};
    for (std::size_t k = 0; k < inputs; ++k) s.x(static_cast<Eigen::Index>(k)) = values[k];
    for (std::size_t k = 0; k < outputs; ++k) s.y(static_cast<Eigen::Index>(k)) = values[inputs + k];
    data.push_back(std::move(s));
  }
  return data;
}

Dataset read_csv(const fs::path& path, std::size_t inputs, std::size_t outputs) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open '" + path.string() + "'");
  return parse_csv(in, inputs, outputs);
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

}  // namespace qmn::io
