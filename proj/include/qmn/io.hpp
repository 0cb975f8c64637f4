#ifndef QMN_IO_HPP
#define QMN_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "qmn/grad.hpp"
#include "qmn/moduli.hpp"
#include "qmn/network.hpp"
#include "qmn/quiver.hpp"
#include "qmn/rep.hpp"
#include "qmn/thincat.hpp"

namespace qmn::io {

using Json = nlohmann::ordered_json;

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

// Quiver files: {"vertices": [...], "arrows": [{"id", "from", "to"}], "roles": {...}, "network": bool}
QuiverSpec quiver_spec_from_json(const Json& j);
QuiverPtr quiver_from_json(const Json& j);
Json to_json(const Quiver& q);
QuiverPtr read_quiver(const std::filesystem::path& path);
/// nullptr for an empty path.
QuiverPtr read_quiver_or_null(const std::string& path);

/// Scalars are read as 1x1; a flat list fills a single row or column.
MatrixXd matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what);
Json to_json(const MatrixXd& m);
Json to_json(const VectorXd& v);

// Representation files: {"quiver": object or path, "dims": {...}, "weights": {...}}.
// Missing dims default to 1; every arrow needs a weight.
struct RepFile {
  QuiverPtr quiver;
  Representation<double> rep;
};

/// `base` resolves a "quiver" given as a relative path.
QuiverPtr embedded_quiver(const Json& j, const std::filesystem::path& base);
Representation<double> rep_from_json(const Json& j, QuiverPtr q);
/// `q` overrides any quiver embedded in the file.
RepFile read_rep(const std::filesystem::path& path, QuiverPtr q = nullptr);
Json to_json(const Representation<double>& r, bool embed_quiver = true);
Json to_json(const ThinRep<double>& r, bool embed_quiver = true);

// Network files: representation file + {"activations": {...}, "bias": [...]}.
// Unlisted vertices use the identity; "bias" marks sources as bias vertices.
NeuralNetwork network_from_json(const Json& j, QuiverPtr q);
NeuralNetwork read_network(const std::filesystem::path& path, QuiverPtr q = nullptr);
Json to_json(const NeuralNetwork& n, bool embed_quiver = true);

Json to_json(const ModuliPoint<double>& m);
Json to_json(const GradientRep& g);

/// One row per sample: `inputs` columns then `outputs` columns. A first row
/// that does not parse as numbers is taken as a header.
Dataset parse_csv(std::istream& in, std::size_t inputs, std::size_t outputs);
Dataset read_csv(const std::filesystem::path& path, std::size_t inputs, std::size_t outputs);
void write_csv(std::ostream& out, const MatrixXd& m);

/// Shortest round-trippable text for a double.
std::string format_double(double x);

}  // namespace qmn::io

#endif  // QMN_IO_HPP
