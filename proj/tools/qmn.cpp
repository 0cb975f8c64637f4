// qmn: command-line front end for the quiver moduli / network library.
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmn/fixtures.hpp"
#include "qmn/grad.hpp"
#include "qmn/io.hpp"
#include "qmn/moduli.hpp"
#include "qmn/network.hpp"
#include "qmn/random.hpp"
#include "qmn/relu.hpp"
#include "qmn/thincat.hpp"

using namespace qmn;
using io::Json;

namespace {

struct Output {
  Json json;
  std::optional<MatrixXd> matrix;  // preferred rendering for --format csv
  int status = 0;
};

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
  } else if (j.is_array()) {
    bool scalars = true;
    for (const auto& v : j)
      if (v.is_structured()) scalars = false;
    if (scalars) {
      std::string s;
      for (const auto& v : j) s += (s.empty() ? "" : " ") + (v.is_string() ? v.get<std::string>() : v.dump());
      rows.emplace_back(prefix, s);
    } else {
      for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "[" + std::to_string(k) + "]", rows);
    }
  } else {
    rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void emit(const Output& out, const std::string& format) {
  if (format == "json") {
    std::cout << out.json.dump(2) << '\n';
    return;
  }
  if (format == "csv" && out.matrix) {
    io::write_csv(std::cout, *out.matrix);
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(out.json, "", rows);
  if (format == "csv") {
    for (const auto& [k, v] : rows) std::cout << csv_cell(k) << ',' << csv_cell(v) << '\n';
    return;
  }
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& [k, v] : rows) std::cout << k << std::string(width - k.size() + 2, ' ') << v << '\n';
}

VectorXd parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (cell.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Parse, "'" + cell + "' is not a number");
    }
  }
  return Eigen::Map<VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

/// "v=2,w=3" on top of thin dimensions.
DimensionVector parse_dims(const Quiver& q, const std::string& text) {
  auto dims = DimensionVector::thin(q);
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (cell.empty()) continue;
    const auto eq = cell.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Parse, "dimension '" + cell + "' must read vertex=n");
    const auto v = q.find_vertex(cell.substr(0, eq));
    if (!v) throw Error(ErrorCode::Parse, "unknown vertex '" + cell.substr(0, eq) + "'");
    try {
      dims[*v] = std::stoi(cell.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Parse, "dimension '" + cell + "' must read vertex=n");
    }
    if (dims[*v] < 0) throw Error(ErrorCode::Parse, "dimensions are nonnegative");
  }
  return dims;
}

Json names(const Quiver& q, const std::vector<std::size_t>& vs) {
  Json j = Json::array();
  for (auto v : vs) j.push_back(q.vertex(v));
  return j;
}

Json hidden_vector(const Quiver& q, const std::vector<int>& values) {
  Json j = Json::object();
  for (std::size_t i = 0; i < values.size(); ++i) j[q.vertex(q.hidden().vertices[i])] = values[i];
  return j;
}

Json hidden_vector(const Quiver& q, const VectorXd& values) {
  Json j = Json::object();
  for (Eigen::Index i = 0; i < values.size(); ++i)
    j[q.vertex(q.hidden().vertices[static_cast<std::size_t>(i)])] = values(i);
  return j;
}

Json classification_json(const Quiver& q, const DimensionVector& dims) {
  const auto& c = q.classification();
  const auto fd = framing_data(q, dims);
  Json hidden_arrows = Json::array();
  for (auto a : q.hidden().arrows) hidden_arrows.push_back(q.arrow(a).id);
  Json roles = Json::object();
  for (std::size_t v = 0; v < q.vertex_count(); ++v) roles[q.vertex(v)] = to_string(q.role(v));
  return {{"sources", names(q, c.sources)},
          {"sinks", names(q, c.sinks)},
          {"hidden", names(q, c.hidden)},
          {"isolated", names(q, c.isolated)},
          {"degenerate", c.degenerate},
          {"connected", c.connected},
          {"topological_order", names(q, c.topological_order)},
          {"hidden_arrows", hidden_arrows},
          {"roles", roles},
          {"u", hidden_vector(q, fd.u)},
          {"w", hidden_vector(q, fd.w)}};
}

struct RepArgs {
  std::string quiver, rep;
  QuiverPtr load_quiver() const { return quiver.empty() ? nullptr : io::read_quiver(quiver); }
  io::RepFile load() const {
    if (rep.empty()) throw Error(ErrorCode::Parse, "--rep is required");
    return io::read_rep(rep, load_quiver());
  }
  /// Quiver from --quiver, or the one embedded in --rep.
  QuiverPtr quiver_only() const {
    if (!quiver.empty()) return io::read_quiver(quiver);
    if (!rep.empty()) return io::read_rep(rep).quiver;
    throw Error(ErrorCode::Parse, "--quiver or --rep is required");
  }
};

DimensionVector dims_for(const Quiver& q, const RepArgs& args, const std::string& dims_text) {
  if (!dims_text.empty()) return parse_dims(q, dims_text);
  if (!args.rep.empty()) return io::read_rep(args.rep, io::read_quiver_or_null(args.quiver)).rep.dims;
  return DimensionVector::thin(q);
}

Json moduli_json(const ModuliPoint<double>& m) { return io::to_json(m); }

Json triple_summary(const DoubleFramedTriple<double>& t, double tol) {
  const auto m = project(t);
  const auto& q = *t.quiver;
  return {{"assembled", io::to_json(m.assembled())},
          {"rank", hidden_vector(q, rank_vector(m, tol))},
          {"dims", hidden_vector(q, hidden_dims(q, t.dims))},
          {"simple", is_simple(t)},
          {"semistable", is_semistable(t)}};
}

double rel_err(const VectorXd& a, const VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

/// Max relative error of forward vs psi_hat(knowledge_map) over the samples.
double factorization_error(const NeuralNetwork& n, const Dataset& data) {
  double worst = 0;
  for (const auto& s : data) {
    try {
      worst = std::max(worst, rel_err(forward(n, s.x).output, psi_hat(knowledge_map(n, s.x))));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularPreActivation) throw;
    }
  }
  return worst;
}

bool has_direct_arrows(const Quiver& q) {
  for (const auto& a : q.arrows())
    if (!q.is_hidden(a.source) && !q.is_hidden(a.target)) return true;
  return false;
}

Output example_d4tilde(std::uint64_t seed, double tol) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.25, 1.0);
  std::bernoulli_distribution flip(0.5);
  auto draw = [&] { return flip(rng) ? u(rng) : -u(rng); };
  fixtures::D4Params p;
  p.a = draw(), p.b = draw(), p.c = draw(), p.d = draw(), p.lambda = draw();
  for (int k = 0; k < 2; ++k) p.phi(k) = draw(), p.psi(k) = draw(), p.v(k) = draw(), p.w(k) = draw();
  const auto thin = fixtures::d4tilde_thin(p);
  const auto t = to_triple(thin);
  const auto& q = *t.quiver;
  const auto m = project(t);
  const auto dim = moduli_dimension(q, t.dims);
  const auto lbp = lbp_simple_exists(q, t.dims);

  std::vector<Activation> act(q.vertex_count(), Activation::Relu);
  NeuralNetwork net(thin, act);
  // Inactive ReLU units zero out downstream pre-activations; redraw until the knowledge map is defined.
  VectorXd x, factored;
  int draws = 0;
  for (bool defined = false; !defined;) {
    x = random_matrix(3, 1, rng);
    ++draws;
    try {
      factored = psi_hat(knowledge_map(net, x));
      defined = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularPreActivation || draws >= 1000) throw;
    }
  }
  const VectorXd direct = forward(net, x).output;
  const MatrixXd nv = network_matrix(m);
  const MatrixXd lin = forward_matrix(to_representation(thin));

  Output out;
  out.json = {{"seed", seed},
              {"quiver", io::to_json(q)},
              {"representation", io::to_json(thin, false)},
              {"u", hidden_vector(q, t.framing.u)},
              {"w", hidden_vector(q, t.framing.w)},
              {"moduli", moduli_json(m)},
              {"assembled", io::to_json(m.assembled())},
              {"rank", hidden_vector(q, rank_vector(m, tol))},
              {"simple", is_simple(t)},
              {"dimension", {{"formula", dim.value},
                             {"jacobian_rank", jacobian_rank(t)},
                             {"expected_only", dim.expected_only},
                             {"double_framed_expected", doubleframe_variant(q, t.dims).expected_dimension}}},
              {"simple_exists", {{"exists", lbp.exists}, {"reason", lbp.reason}}},
              {"factorization", {{"activation", "relu"},
                                 {"input", io::to_json(x)},
                                 {"draws", draws},
                                 {"network", io::to_json(direct)},
                                 {"knowledge", io::to_json(factored)},
                                 {"rel_err", rel_err(direct, factored)}}},
              {"network_matrix", {{"out_pi_in", io::to_json(nv)},
                                  {"forward", io::to_json(lin)},
                                  {"max_abs_diff", (nv - lin).cwiseAbs().maxCoeff()}}}};
  out.matrix = m.assembled();
  return out;
}

Output example_a3(double a, double b) {
  const auto thin = fixtures::a3_thin(a, b);
  const auto t = to_triple(thin);
  const auto& q = *t.quiver;
  const auto dq = deframe(q, t.dims);
  const auto m = project(t);
  Json deframed = Json::array();
  for (const auto& arrow : dq.arrows)
    deframed.push_back({{"id", arrow.id}, {"from", dq.vertices[arrow.source]}, {"to", dq.vertices[arrow.target]}});
  Output out;
  out.json = {{"quiver", io::to_json(q)},
              {"representation", io::to_json(thin, false)},
              {"classification", classification_json(q, t.dims)},
              {"deframed", {{"vertices", dq.vertices}, {"arrows", deframed}, {"affine_type_a", dq.is_affine_type_a()}}},
              {"moduli", moduli_json(m)},
              {"simple", is_simple(t)},
              {"simple_exists", lbp_simple_exists(q, t.dims).exists},
              {"moduli_dimension", moduli_dimension(q, t.dims).value},
              {"double_framed_expected", doubleframe_variant(q, t.dims).expected_dimension}};
  out.matrix = m.assembled();
  return out;
}

Output example_single_vertex(double f, double h, double tol) {
  const auto net = fixtures::single_vertex_relu(f, h);
  const auto t = to_triple(net.weights());
  const double mu = momentum(t)[0](0, 0);
  Json table = Json::array();
  MatrixXd m(9, 2);
  for (int k = 0; k < 9; ++k) {
    const double x = -2.0 + 0.5 * k;
    const double y = forward(net, VectorXd::Constant(1, x)).output(0);
    table.push_back({{"x", x}, {"y", y}});
    m(k, 0) = x;
    m(k, 1) = y;
  }
  Json balanced;
  try {
    const auto r = balance(t, 0.0, tol);
    balanced = {{"gauge", r.gauge(0)}, {"f", r.balanced.f[0](0, 0)}, {"h", r.balanced.h[0](0, 0)},
                {"sweeps", r.sweeps}, {"residual", r.residual}};
  } catch (const Error& e) {
    balanced = {{"error", e.what()}};
  }
  Output out;
  out.json = {{"f", f},
              {"h", h},
              {"momentum", mu},
              {"in_M_plus", std::abs(mu) <= tol},
              {"in_M_tilde_plus", std::abs(mu - 1) <= tol},
              {"network_function", table},
              {"balance_to_zero", balanced}};
  out.matrix = m;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-framed quiver representations, their moduli, and neural networks"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));

  Output out;
  std::function<Output()> action;

  // validate
  RepArgs vargs;
  std::string vdims;
  auto* validate_cmd = app.add_subcommand("validate", "Check a quiver and classify its vertices");
  validate_cmd->add_option("--quiver", vargs.quiver, "Quiver file");
  validate_cmd->add_option("--rep", vargs.rep, "Representation file (dimension vector)");
  validate_cmd->add_option("--dims", vdims, "Dimensions, e.g. v=2,w=3 (default thin)");
  validate_cmd->callback([&] {
    action = [&] {
      auto q = vargs.quiver_only();
      return Output{classification_json(*q, dims_for(*q, vargs, vdims)), std::nullopt};
    };
  });

  // moduli
  auto* moduli_cmd = app.add_subcommand("moduli", "Moduli coordinates, ranks and dimension counts");
  moduli_cmd->require_subcommand(1);
  RepArgs margs;
  bool assembled = false;
  double rank_tol = kRankTol;
  std::string mdims;
  auto* coords = moduli_cmd->add_subcommand("coords", "Blocks h_j V_w f_i of the moduli point");
  coords->add_option("--quiver", margs.quiver, "Quiver file (overrides the one in --rep)");
  coords->add_option("--rep", margs.rep, "Representation file")->required();
  coords->add_flag("--assembled", assembled, "Emit the assembled block matrix");
  coords->callback([&] {
    action = [&] {
      const auto r = margs.load();
      const auto m = project(split(r.rep));
      if (assembled) return Output{io::to_json(m.assembled()), m.assembled()};
      return Output{{{"blocks", io::to_json(m)}}, m.assembled()};
    };
  });
  auto* rank = moduli_cmd->add_subcommand("rank", "Rank vector of the moduli point");
  rank->add_option("--quiver", margs.quiver, "Quiver file (overrides the one in --rep)");
  rank->add_option("--rep", margs.rep, "Representation file")->required();
  rank->add_option("--tol", rank_tol, "Relative singular value threshold");
  rank->callback([&] {
    action = [&] {
      const auto r = margs.load();
      return Output{triple_summary(split(r.rep), rank_tol), std::nullopt};
    };
  });
  auto* dim = moduli_cmd->add_subcommand("dim", "Dimension of the moduli space");
  dim->add_option("--quiver", margs.quiver, "Quiver file");
  dim->add_option("--rep", margs.rep, "Take the dimension vector from this representation");
  dim->add_option("--dims", mdims, "Dimensions, e.g. v=2,w=3 (default thin)");
  dim->callback([&] {
    action = [&] {
      auto q = margs.quiver_only();
      const auto d = moduli_dimension(*q, dims_for(*q, margs, mdims));
      Output o{{{"dimension", d.value}, {"expected_only", d.expected_only}}, std::nullopt};
      if (format != "json") o.matrix = MatrixXd::Constant(1, 1, static_cast<double>(d.value));
      return o;
    };
  });
  auto* exists = moduli_cmd->add_subcommand("simple-exists", "Numerical criterion for simple points");
  exists->add_option("--quiver", margs.quiver, "Quiver file");
  exists->add_option("--rep", margs.rep, "Take the dimension vector from this representation");
  exists->add_option("--dims", mdims, "Dimensions, e.g. v=2,w=3 (default thin)");
  exists->callback([&] {
    action = [&] {
      auto q = margs.quiver_only();
      const auto dims = dims_for(*q, margs, mdims);
      const auto s = lbp_simple_exists(*q, dims);
      return Output{{{"exists", s.exists},
                     {"affine_type_a", s.affine_type_a},
                     {"reason", s.reason},
                     {"dims", hidden_vector(*q, hidden_dims(*q, dims))}},
                    std::nullopt};
    };
  });

  // net
  auto* net_cmd = app.add_subcommand("net", "Neural network evaluation and training");
  net_cmd->require_subcommand(1);
  std::string net_path, quiver_override, input_text, label_text, data_path, trace_path, out_path, rep_path;
  std::string loss_name = "mse", mode = "backprop";
  double lr = 0.05, grad_tol = 1e-5, step = 1e-5;
  int epochs = 500, samples = 5;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  bool literal = false;
  auto load_net = [&] {
    if (net_path.empty()) throw Error(ErrorCode::Parse, "--net is required");
    return io::read_network(net_path, io::read_quiver_or_null(quiver_override));
  };
  auto parse_loss_flag = [&] {
    auto l = parse_loss(loss_name);
    if (!l) throw Error(ErrorCode::Parse, "unknown loss '" + loss_name + "'");
    return *l;
  };
  auto* eval = net_cmd->add_subcommand("eval", "Network function at an input");
  eval->add_option("--net", net_path, "Network file")->required();
  eval->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded one)");
  eval->add_option("--input", input_text, "Comma-separated input values");
  eval->callback([&] {
    action = [&] {
      const auto n = load_net();
      const auto tr = forward(n, parse_vector(input_text));
      const auto& q = n.quiver();
      Json a = Json::object(), z = Json::object();
      for (std::size_t v = 0; v < q.vertex_count(); ++v) {
        a[q.vertex(v)] = tr.a(static_cast<Eigen::Index>(v));
        z[q.vertex(v)] = tr.z(static_cast<Eigen::Index>(v));
      }
      return Output{{{"output", io::to_json(tr.output)},
                     {"outputs", names(q, n.outputs())},
                     {"activation", a},
                     {"pre_activation", z}},
                    MatrixXd(tr.output.transpose())};
    };
  });
  auto* knowledge = net_cmd->add_subcommand("knowledge", "Knowledge representation W_x^f");
  knowledge->add_option("--net", net_path, "Network file")->required();
  knowledge->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded one)");
  knowledge->add_option("--input", input_text, "Comma-separated input values");
  knowledge->callback([&] {
    action = [&] {
      const auto n = load_net();
      return Output{io::to_json(knowledge_map(n, parse_vector(input_text))), std::nullopt};
    };
  });
  auto* psihat = net_cmd->add_subcommand("psihat", "Identity-activation output on the all-ones input");
  psihat->add_option("--rep", rep_path, "Thin representation file")->required();
  psihat->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded one)");
  psihat->callback([&] {
    action = [&] {
      const auto r = io::read_rep(rep_path, io::read_quiver_or_null(quiver_override));
      const auto y = psi_hat(to_thin(r.rep));
      Json j{{"output", io::to_json(y)}, {"outputs", names(*r.quiver, framed_sinks(*r.quiver))}};
      if (!has_direct_arrows(*r.quiver))
        j["from_moduli_point"] = io::to_json(psi_hat(project(split(r.rep))));
      return Output{j, MatrixXd(y.transpose())};
    };
  });
  auto* grad_cmd = net_cmd->add_subcommand("grad", "Gradient of the loss at one sample");
  grad_cmd->add_option("--net", net_path, "Network file")->required();
  grad_cmd->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded one)");
  grad_cmd->add_option("--input", input_text, "Comma-separated input values");
  grad_cmd->add_option("--label", label_text, "Comma-separated label values")->required();
  grad_cmd->add_option("--loss", loss_name, "mse or softmax-ce");
  grad_cmd->add_option("--mode", mode, "backprop, factored, paper-literal or numeric")
      ->check(CLI::IsMember({"backprop", "factored", "paper-literal", "numeric"}));
  grad_cmd->add_flag("--paper-literal", literal, "Same as --mode paper-literal");
  grad_cmd->add_option("--step", step, "Finite-difference step for --mode numeric");
  grad_cmd->callback([&] {
    action = [&] {
      const auto n = load_net();
      const auto x = parse_vector(input_text), y = parse_vector(label_text);
      const auto loss = parse_loss_flag();
      if (literal) mode = "paper-literal";
      GradientRep g;
      if (mode == "backprop") g = backprop(n, x, y, loss);
      else if (mode == "factored") g = backprop_factored(n, x, y, loss);
      else if (mode == "paper-literal") g = backprop_literal(n, x, y, loss);
      else g = {n.quiver_ptr(), numerical_gradient(n, x, y, loss, step), VectorXd::Zero(static_cast<Eigen::Index>(n.quiver().vertex_count()))};
      const auto reference = backprop(n, x, y, loss);
      Json j = io::to_json(g);
      if (mode == "numeric") j.erase("da");
      j["mode"] = mode;
      j["loss"] = loss_value(loss, forward(n, x).output, y);
      j["max_abs_diff_from_backprop"] = (g.dw - reference.dw).cwiseAbs().maxCoeff();
      return Output{j, MatrixXd(g.dw.transpose())};
    };
  });
  auto* gradcheck = net_cmd->add_subcommand("gradcheck", "Backprop against central differences");
  gradcheck->add_option("--net", net_path, "Network file")->required();
  gradcheck->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded one)");
  gradcheck->add_option("--seed", seed, "Seed for the sampled inputs and labels");
  gradcheck->add_option("--tol", grad_tol, "Largest accepted relative error");
  gradcheck->add_option("--samples", samples, "Number of sampled (x, y) pairs");
  gradcheck->add_option("--step", step, "Finite-difference step");
  gradcheck->add_option("--loss", loss_name, "mse or softmax-ce");
  gradcheck->callback([&] {
    action = [&] {
      const auto n = load_net();
      const auto loss = parse_loss_flag();
      Rng rng(seed);
      double worst = 0;
      for (int k = 0; k < samples; ++k) {
        VectorXd x = random_matrix(static_cast<Eigen::Index>(n.inputs().size()), 1, rng);
        VectorXd y = random_matrix(static_cast<Eigen::Index>(n.outputs().size()), 1, rng);
        const VectorXd exact = backprop(n, x, y, loss).dw;
        const VectorXd fd = numerical_gradient(n, x, y, loss, step);
        const double scale = std::max(exact.cwiseAbs().maxCoeff(), 1e-8);
        worst = std::max(worst, (exact - fd).cwiseAbs().maxCoeff() / scale);
      }
      Json j{{"samples", samples}, {"seed", seed}, {"max_rel_err", worst}, {"tol", grad_tol}, {"pass", worst <= grad_tol}};
      return Output{j, std::nullopt, worst <= grad_tol ? 0 : 3};
    };
  });
  auto* train_cmd = net_cmd->add_subcommand("train", "Full-batch gradient descent");
  train_cmd->add_option("--net", net_path, "Network file")->required();
  train_cmd->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded one)");
  train_cmd->add_option("--data", data_path, "CSV: inputs then labels per row")->required();
  train_cmd->add_option("--loss", loss_name, "mse or softmax-ce");
  train_cmd->add_option("--lr", lr, "Step size");
  train_cmd->add_option("--epochs", epochs, "Number of updates");
  train_cmd->add_option("--threads", threads, "Worker threads (default QMN_THREADS or 1)");
  train_cmd->add_option("--trace-moduli", trace_path, "Write one JSON line per epoch");
  train_cmd->add_option("--out", out_path, "Write the trained network here");
  train_cmd->callback([&] {
    action = [&] {
      const auto n = load_net();
      const auto data = io::read_csv(data_path, n.inputs().size(), n.outputs().size());
      TrainOptions opts;
      opts.loss = parse_loss_flag();
      opts.lr = lr;
      opts.epochs = epochs;
      opts.threads = threads;
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw Error(ErrorCode::Parse, "cannot write '" + trace_path + "'");
      }
      double worst_factorization = 0;
      const bool direct = has_direct_arrows(n.quiver());
      opts.observer = [&](int epoch, const NeuralNetwork& current, double l) {
        const double fe = factorization_error(current, data);
        worst_factorization = std::max(worst_factorization, fe);
        if (!trace.is_open()) return;
        Json line{{"epoch", epoch}, {"loss", l}, {"factorization_rel_err", fe}};
        if (!data.empty() && !direct) {
          try {
            line["moduli"] = io::to_json(project(to_triple(knowledge_map(current, data.front().x))));
          } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularPreActivation) throw;
            line["moduli"] = nullptr;
          }
        }
        trace << line.dump() << '\n';
      };
      const auto result = train(n, data, opts);
      if (!out_path.empty()) io::write_json(out_path, io::to_json(result.net));
      Json j{{"epochs", epochs},
             {"lr", lr},
             {"loss", to_string(opts.loss)},
             {"initial_loss", result.history.front()},
             {"final_loss", result.history.back()},
             {"max_factorization_rel_err", worst_factorization},
             {"weights", io::to_json(result.net.weights(), false)["weights"]}};
      return Output{j, std::nullopt};
    };
  });

  // thin
  auto* thin_cmd = app.add_subcommand("thin", "Thin representations as a monoidal category");
  thin_cmd->require_subcommand(1);
  std::string thin_a, thin_b;
  double thin_tol = 1e-9;
  auto load_thin = [&](const std::string& path) {
    return to_thin(io::read_rep(path, io::read_quiver_or_null(quiver_override)).rep);
  };
  auto* tensor_cmd = thin_cmd->add_subcommand("tensor", "Pointwise tensor product");
  tensor_cmd->add_option("a", thin_a, "First representation file")->required();
  tensor_cmd->add_option("b", thin_b, "Second representation file")->required();
  tensor_cmd->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded ones)");
  tensor_cmd->callback([&] {
    action = [&] { return Output{io::to_json(tensor(load_thin(thin_a), load_thin(thin_b))), std::nullopt}; };
  });
  auto* invertible_cmd = thin_cmd->add_subcommand("invertible", "Invertibility under the tensor product");
  invertible_cmd->add_option("a", thin_a, "Representation file")->required();
  invertible_cmd->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded one)");
  invertible_cmd->callback([&] {
    action = [&] {
      const auto a = load_thin(thin_a);
      const auto inv = tensor_inverse(a);
      Json j{{"invertible", inv.has_value()}};
      if (inv) j["inverse"] = io::to_json(*inv);
      return Output{j, std::nullopt};
    };
  });
  auto* morphism_cmd = thin_cmd->add_subcommand("morphism", "Solve for a network morphism a -> b");
  morphism_cmd->add_option("a", thin_a, "Source representation file")->required();
  morphism_cmd->add_option("b", thin_b, "Target representation file")->required();
  morphism_cmd->add_option("--quiver", quiver_override, "Quiver file (overrides the embedded ones)");
  morphism_cmd->add_option("--tol", thin_tol, "Intertwining tolerance");
  morphism_cmd->callback([&] {
    action = [&] {
      const auto a = load_thin(thin_a), b = load_thin(thin_b);
      const auto m = solve_morphism(a, b, thin_tol);
      Json j{{"exists", m.has_value()}};
      if (m) {
        const auto c = check_morphism(*m, a, b, thin_tol);
        Json g = Json::object();
        for (std::size_t v = 0; v < a.quiver->vertex_count(); ++v)
          g[a.quiver->vertex(v)] = m->g(static_cast<Eigen::Index>(v));
        j["g"] = g;
        j["iso"] = c.iso;
        j["residual"] = c.residual;
      }
      return Output{j, std::nullopt};
    };
  });

  // relu
  auto* relu_cmd = app.add_subcommand("relu", "Momentum map and level sets");
  relu_cmd->require_subcommand(1);
  RepArgs rargs;
  double target = 0, relu_tol = 1e-8;
  int max_sweeps = kBalanceSweeps;
  auto* momentum_cmd = relu_cmd->add_subcommand("momentum", "Momentum map per hidden vertex");
  momentum_cmd->add_option("--rep", rargs.rep, "Representation file")->required();
  momentum_cmd->add_option("--quiver", rargs.quiver, "Quiver file (overrides the embedded one)");
  momentum_cmd->add_option("--tol", relu_tol, "Level-set membership tolerance");
  momentum_cmd->callback([&] {
    action = [&] {
      const auto t = split(rargs.load().rep);
      const auto& q = *t.quiver;
      const auto mu = momentum(t);
      Json values = Json::object();
      for (std::size_t i = 0; i < mu.size(); ++i) values[q.vertex(q.hidden().vertices[i])] = io::to_json(mu[i]);
      const auto zero = level_set_membership(t, 0.0, relu_tol);
      const auto one = level_set_membership(t, 1.0, relu_tol);
      return Output{{{"momentum", values},
                     {"in_M_plus", zero.all()},
                     {"in_M_tilde_plus", one.all()},
                     {"residual_level_0", zero.residual},
                     {"residual_level_1", one.residual}},
                    std::nullopt};
    };
  });
  auto* balance_cmd = relu_cmd->add_subcommand("balance", "Positive gauge onto a level set");
  balance_cmd->add_option("--rep", rargs.rep, "Thin representation file")->required();
  balance_cmd->add_option("--quiver", rargs.quiver, "Quiver file (overrides the embedded one)");
  balance_cmd->add_option("--target", target, "Level: 0 or 1");
  balance_cmd->add_option("--tol", relu_tol, "Residual tolerance");
  balance_cmd->add_option("--max-sweeps", max_sweeps, "Sweep budget");
  balance_cmd->callback([&] {
    action = [&] {
      const auto t = split(rargs.load().rep);
      const auto r = balance(t, target, relu_tol, max_sweeps);
      return Output{{{"gauge", hidden_vector(*t.quiver, r.gauge)},
                     {"sweeps", r.sweeps},
                     {"residual", r.residual},
                     {"balanced", io::to_json(join(r.balanced))}},
                    std::nullopt};
    };
  });

  // example
  auto* example_cmd = app.add_subcommand("example", "Bundled worked examples");
  example_cmd->require_subcommand(1);
  std::uint64_t example_seed = 7;
  double ex_tol = kRankTol, ex_a = 2, ex_b = 3, ex_f = 3, ex_h = 2;
  auto* d4 = example_cmd->add_subcommand("d4tilde", "Five hidden vertices, three sources, two sinks");
  d4->add_option("--seed", example_seed, "Seed for the random weights");
  d4->add_option("--tol", ex_tol, "Rank threshold");
  d4->callback([&] { action = [&] { return example_d4tilde(example_seed, ex_tol); }; });
  auto* a3 = example_cmd->add_subcommand("a3", "The path i -> j -> k");
  a3->add_option("--a", ex_a, "Weight of i -> j");
  a3->add_option("--b", ex_b, "Weight of j -> k");
  a3->callback([&] { action = [&] { return example_a3(ex_a, ex_b); }; });
  auto* svr = example_cmd->add_subcommand("single-vertex-relu", "One hidden ReLU unit");
  svr->set_help_flag("--help", "Print this help message and exit");
  svr->add_option("--f", ex_f, "Input weight");
  svr->add_option("--h", ex_h, "Output weight");
  svr->add_option("--tol", relu_tol, "Level-set tolerance");
  svr->callback([&] { action = [&] { return example_single_vertex(ex_f, ex_h, relu_tol); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (!action) return 1;
    const auto result = action();
    emit(result, format);
    return result.status;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Numeric ? 3 : 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
