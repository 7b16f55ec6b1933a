#pragma once

// On-disk formats: sequence containers, matrix CSV, learner checkpoints,
// whitening transforms, traces and PGM filter images.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "motionsm/core.hpp"
#include "motionsm/learner.hpp"
#include "motionsm/preprocess.hpp"
#include "motionsm/stimuli.hpp"

namespace motionsm {

namespace fs = std::filesystem;

// Sequence container: the line "MOTIONSM-SEQ 1", a little-endian uint64 header
// length, the JSON header, then for each sequence its frames followed by its
// ground truth, row-major little-endian float64.
void write_sequences(const fs::path& path, const std::vector<FrameSequence>& sequences,
                     const nlohmann::json& extra = nlohmann::json::object());
std::vector<FrameSequence> read_sequences(const fs::path& path, nlohmann::json* header = nullptr);
/// One frame per row.
void export_sequence_csv(const fs::path& path, const FrameSequence& sequence);

void write_matrix_csv(const fs::path& path, const Matrix& m);
Matrix read_matrix_csv(const fs::path& path);

struct Checkpoint {
  LearnerState state;
  nlohmann::json manifest;
};

/// Writes W.csv, M.csv and manifest.json into `dir`. `extra` is merged into
/// the manifest (config hash, feature kind, source).
void save_checkpoint(const fs::path& dir, const LearnerState& state, const nlohmann::json& extra);
Checkpoint load_checkpoint(const fs::path& dir);

/// CSV: mean row, then matrix rows. Sidecar JSON next to it.
void save_whitening(const fs::path& csv_path, const WhiteningTransform& t, const nlohmann::json& extra = {});
WhiteningTransform load_whitening(const fs::path& csv_path);

/// Columns step, a, theta; step counts processed pairs from 1.
void write_trace_csv(const fs::path& path, const RowMatrix& theta);

struct PgmAffine {
  double min = 0.0;
  double max = 0.0;
  /// pixel = round(scale * value + offset)
  double scale = 0.0;
  double offset = 0.0;
};

/// ASCII P2, min -> 0 and max -> 255 (constant images map to 128).
PgmAffine write_pgm(const fs::path& path, const Matrix& image);
nlohmann::json to_json(const PgmAffine& a);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace motionsm
