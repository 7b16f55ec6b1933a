#include "motionsm/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "motionsm/config.hpp"

namespace motionsm {

namespace {

constexpr const char* kMagic = "MOTIONSM-SEQ 1\n";

static_assert(std::endian::native == std::endian::little, "sequence files assume a little-endian host");

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  return in;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_raw(std::ofstream& out, const RowMatrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
}

void read_raw(std::ifstream& in, RowMatrix& m) {
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw IoError("sequence file truncated");
}

}  // namespace

void write_sequences(const fs::path& path, const std::vector<FrameSequence>& sequences, const nlohmann::json& extra) {
  if (sequences.empty()) throw InvalidArgument("nothing to write");
  nlohmann::json header = extra;
  header["format"] = "motionsm-sequence";
  header["dtype"] = "float64-le";
  header["order"] = "row-major";
  header["spec"] = to_json(sequences.front().spec);
  header["n"] = sequences.front().spec.n;
  header["frame_size"] = sequences.front().frames.cols();
  header["axes"] = sequences.front().ground_truth.cols();
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : sequences) {
    if (s.frames.cols() != sequences.front().frames.cols()) throw InvalidArgument("sequences differ in frame size");
    list.push_back({{"T", s.frames.rows()}, {"ground_truth_rows", s.ground_truth.rows()}});
  }
  header["sequences"] = list;
  const std::string text = header.dump();
  const std::uint64_t length = text.size();

  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kMagic, static_cast<std::streamsize>(std::strlen(kMagic)));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& s : sequences) {
    write_raw(out, s.frames);
    write_raw(out, s.ground_truth);
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<FrameSequence> read_sequences(const fs::path& path, nlohmann::json* header_out) {
  std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
  std::string magic(std::strlen(kMagic), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw IoError("'" + path.string() + "' is not a sequence file");
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || length > (1ULL << 30)) throw IoError("corrupt sequence header");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw IoError("sequence header truncated");
  const nlohmann::json header = nlohmann::json::parse(text);
  if (header.at("dtype") != "float64-le") throw IoError("unsupported dtype");

  const StimulusSpec spec = stimulus_from_json(header.at("spec"));
  const auto width = header.at("frame_size").get<Eigen::Index>();
  const auto axes = header.at("axes").get<Eigen::Index>();
  std::vector<FrameSequence> out;
  for (const auto& entry : header.at("sequences")) {
    FrameSequence s;
    s.spec = spec;
    s.frames.resize(entry.at("T").get<Eigen::Index>(), width);
    s.ground_truth.resize(entry.at("ground_truth_rows").get<Eigen::Index>(), axes);
    read_raw(in, s.frames);
    read_raw(in, s.ground_truth);
    out.push_back(std::move(s));
  }
  if (header_out) *header_out = header;
  return out;
}

void export_sequence_csv(const fs::path& path, const FrameSequence& sequence) {
  write_matrix_csv(path, sequence.frames);
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Matrix read_matrix_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in '" + path.string() + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError("ragged CSV '" + path.string() + "'");
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

void save_checkpoint(const fs::path& dir, const LearnerState& state, const nlohmann::json& extra) {
  fs::create_directories(dir);
  write_matrix_csv(dir / "W.csv", state.W);
  write_matrix_csv(dir / "M.csv", state.M);
  nlohmann::json manifest = extra;
  manifest["K"] = state.channels();
  manifest["n"] = state.n;
  manifest["mode"] = to_string(state.mode);
  manifest["t"] = state.step;
  manifest["seed"] = state.seed;
  manifest["theta_hat"] = std::vector<double>(state.cumulative.data(), state.cumulative.data() + state.cumulative.size());
  write_json(dir / "manifest.json", manifest);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  Checkpoint c;
  c.manifest = read_json(dir / "manifest.json");
  LearnerState& s = c.state;
  try {
    s.n = c.manifest.at("n").get<int>();
    s.mode = learner_mode_from_string(c.manifest.at("mode").get<std::string>());
    s.step = c.manifest.value("t", 0L);
    s.seed = c.manifest.value("seed", std::uint64_t{0});
    const auto hat = c.manifest.at("theta_hat").get<std::vector<double>>();
    s.cumulative = Eigen::Map<const Vector>(hat.data(), static_cast<Eigen::Index>(hat.size()));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint manifest in '" + dir.string() + "': " + e.what());
  }
  s.W = read_matrix_csv(dir / "W.csv");
  s.M = read_matrix_csv(dir / "M.csv");
  const auto k = c.manifest.at("K").get<Eigen::Index>();
  if (s.W.rows() != k || s.W.cols() != static_cast<Eigen::Index>(s.n) * s.n || s.M.rows() != k || s.M.cols() != k ||
      s.cumulative.size() != k) {
    throw IoError("checkpoint '" + dir.string() + "' has inconsistent shapes");
  }
  return c;
}

void save_whitening(const fs::path& csv_path, const WhiteningTransform& t, const nlohmann::json& extra) {
  Matrix m(t.size() + 1, t.size());
  m.row(0) = t.mean.transpose();
  m.bottomRows(t.size()) = t.matrix;
  write_matrix_csv(csv_path, m);
  nlohmann::json side = extra.is_object() ? extra : nlohmann::json::object();
  side["n"] = t.size();
  side["epsilon"] = t.epsilon;
  side["fit_hash"] = hex64(t.fit_hash);
  fs::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_json(sidecar, side);
}

WhiteningTransform load_whitening(const fs::path& csv_path) {
  const Matrix m = read_matrix_csv(csv_path);
  if (m.rows() < 2 || m.rows() != m.cols() + 1) throw IoError("bad whitening CSV '" + csv_path.string() + "'");
  fs::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  const nlohmann::json side = read_json(sidecar);
  WhiteningTransform t;
  t.mean = m.row(0).transpose();
  t.matrix = m.bottomRows(m.cols());
  t.epsilon = side.value("epsilon", 0.0);
  t.fit_hash = std::stoull(side.value("fit_hash", std::string("0")), nullptr, 16);
  return t;
}

void write_trace_csv(const fs::path& path, const RowMatrix& theta) {
  std::ofstream out = open_out(path);
  out << "step,a,theta\n";
  for (Eigen::Index t = 0; t < theta.rows(); ++t)
    for (Eigen::Index a = 0; a < theta.cols(); ++a) out << t + 1 << ',' << a << ',' << format_double(theta(t, a)) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

PgmAffine write_pgm(const fs::path& path, const Matrix& image) {
  if (image.size() == 0) throw InvalidArgument("empty image");
  if (!image.allFinite()) throw NumericalFailure("non-finite image");
  PgmAffine a;
  a.min = image.minCoeff();
  a.max = image.maxCoeff();
  if (a.max > a.min) {
    a.scale = 255.0 / (a.max - a.min);
    a.offset = -a.min * a.scale;
  } else {
    a.scale = 0.0;
    a.offset = 128.0;
  }
  std::ofstream out = open_out(path);
  out << "P2\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const long v = std::lround(a.scale * image(r, c) + a.offset);
      out << (c ? " " : "") << std::clamp(v, 0L, 255L);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
  return a;
}

nlohmann::json to_json(const PgmAffine& a) {
  return {{"min", a.min}, {"max", a.max}, {"scale", a.scale}, {"offset", a.offset}};
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace motionsm
