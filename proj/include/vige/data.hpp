#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vige/image.hpp"
#include "vige/rng.hpp"
#include "vige/tensor.hpp"

namespace vige {

// One labeled gait clip on disk: root/<subject>/<condition>/<angle>/<seq>/.
struct SequenceRecord {
    std::filesystem::path dir;
    std::string subject;
    std::string condition;
    std::string seq_id;
    double angle_deg = 0.0;
    int view_label = 0;  // dense index into the sorted angle table
    int frame_count = 0;
};

struct LoadReport {
    int sequences = 0;
    int skipped_empty = 0;
    int dropped_frames = 0;  // all-background frames removed by preprocessing
    std::vector<std::string> warnings;
};

struct DatasetIndex {
    std::vector<SequenceRecord> records;
    std::vector<double> view_angles;  // ascending; view_label indexes this
    std::map<std::string, std::vector<int>> subject_records;

    int num_views() const { return static_cast<int>(view_angles.size()); }
    int num_subjects() const { return static_cast<int>(subject_records.size()); }
};

// Walks the directory layout and indexes every non-empty sequence. Angles
// are sorted ascending to form the view labels. Missing root is an error;
// empty sequences are skipped with a warning in the report.
DatasetIndex load_dataset(const std::filesystem::path& root, LoadReport* report = nullptr);

// A fully loaded, preprocessed (64x44 binary) in-memory dataset.
struct LoadedSequence {
    int record = -1;  // index into the source DatasetIndex
    std::vector<Frame> frames;
};

class LoadedDataset {
  public:
    static LoadedDataset load(const DatasetIndex& index, LoadReport* report = nullptr);

    const DatasetIndex& index() const { return index_; }
    const std::vector<LoadedSequence>& sequences() const { return sequences_; }
    const LoadedSequence& sequence(int i) const { return sequences_[static_cast<std::size_t>(i)]; }

    // Dense subject label (index into the sorted subject list).
    int subject_label(const std::string& subject) const;

  private:
    DatasetIndex index_;
    std::vector<LoadedSequence> sequences_;
    std::map<std::string, int> subject_labels_;
};

struct BatchEntry {
    int sequence = -1;     // index into LoadedDataset::sequences()
    int subject_label = 0;
    int view_label = 0;
    std::vector<const Frame*> frames;  // exactly T_s sampled frames
};

struct Batch {
    std::vector<BatchEntry> entries;  // P*K entries, grouped by subject
    bool replacement_used = false;    // a subject had fewer than K sequences

    std::vector<int> subject_labels() const;
    std::vector<int> view_labels() const;
};

// P distinct subjects uniformly, K sequences each (with replacement only when
// a subject holds fewer than K, flagged), T_s frames per sequence by sorted
// uniform sampling (with replacement when the clip is shorter than T_s).
Batch sample_batch(const LoadedDataset& data, int subjects_per_batch, int seqs_per_subject,
                   int frames_per_seq, Rng& rng);

// 0/255 frames to [1 x H x W] tensors with values 0/1.
std::vector<TensorPtr> frames_to_tensors(std::span<const Frame* const> frames);
std::vector<TensorPtr> frames_to_tensors(std::span<const Frame> frames);

}  // namespace vige
