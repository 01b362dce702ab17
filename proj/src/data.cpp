#include "vige/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vige {

namespace {

namespace fs = std::filesystem;

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<fs::path> sorted_frame_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext == ".pgm" || ext == ".png") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

DatasetIndex load_dataset(const std::filesystem::path& root, LoadReport* report) {
    if (!fs::exists(root) || !fs::is_directory(root)) {
        throw IoError("dataset root " + root.string() + " does not exist");
    }
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    DatasetIndex index;
    std::set<double> angles;
    for (const auto& subject_dir : sorted_subdirs(root)) {
        for (const auto& condition_dir : sorted_subdirs(subject_dir)) {
            for (const auto& angle_dir : sorted_subdirs(condition_dir)) {
                double angle = 0.0;
                try {
                    angle = std::stod(angle_dir.filename().string());
                } catch (const std::exception&) {
                    rep.warnings.push_back("skipping non-numeric view directory " +
                                           angle_dir.string());
                    continue;
                }
                for (const auto& seq_dir : sorted_subdirs(angle_dir)) {
                    const auto frames = sorted_frame_files(seq_dir);
                    if (frames.empty()) {
                        ++rep.skipped_empty;
                        rep.warnings.push_back("skipping empty sequence " + seq_dir.string());
                        continue;
                    }
                    SequenceRecord rec;
                    rec.dir = seq_dir;
                    rec.subject = subject_dir.filename().string();
                    rec.condition = condition_dir.filename().string();
                    rec.seq_id = seq_dir.filename().string();
                    rec.angle_deg = angle;
                    rec.frame_count = static_cast<int>(frames.size());
                    index.records.push_back(std::move(rec));
                    angles.insert(angle);
                }
            }
        }
    }
    if (index.records.empty()) {
        rep.warnings.push_back("no sequences found under " + root.string());
    }

    index.view_angles.assign(angles.begin(), angles.end());
    for (std::size_t i = 0; i < index.records.size(); ++i) {
        auto& rec = index.records[i];
        const auto it =
            std::lower_bound(index.view_angles.begin(), index.view_angles.end(), rec.angle_deg);
        rec.view_label = static_cast<int>(it - index.view_angles.begin());
        index.subject_records[rec.subject].push_back(static_cast<int>(i));
    }
    rep.sequences = static_cast<int>(index.records.size());
    return index;
}

LoadedDataset LoadedDataset::load(const DatasetIndex& index, LoadReport* report) {
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    LoadedDataset data;
    data.index_ = index;
    data.index_.records.clear();
    data.index_.subject_records.clear();

    for (const auto& rec : index.records) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(rec.dir)) {
            if (!e.is_regular_file()) continue;
            const auto ext = e.path().extension().string();
            if (ext == ".pgm" || ext == ".png") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());

        LoadedSequence seq;
        for (const auto& f : files) {
            auto processed = preprocess_frame(read_image(f));
            if (!processed) {
                ++rep.dropped_frames;
                rep.warnings.push_back("dropped all-background frame " + f.string());
                continue;
            }
            seq.frames.push_back(std::move(*processed));
        }
        if (seq.frames.empty()) {
            ++rep.skipped_empty;
            rep.warnings.push_back("skipping sequence with no usable frames " + rec.dir.string());
            continue;
        }
        SequenceRecord kept = rec;
        kept.frame_count = static_cast<int>(seq.frames.size());
        seq.record = static_cast<int>(data.index_.records.size());
        data.index_.records.push_back(std::move(kept));
        data.sequences_.push_back(std::move(seq));
    }
    for (std::size_t i = 0; i < data.index_.records.size(); ++i) {
        data.index_.subject_records[data.index_.records[i].subject].push_back(
            static_cast<int>(i));
    }
    int label = 0;
    for (const auto& [subject, _] : data.index_.subject_records) {
        data.subject_labels_[subject] = label++;
    }
    rep.sequences = static_cast<int>(data.index_.records.size());
    return data;
}

int LoadedDataset::subject_label(const std::string& subject) const {
    const auto it = subject_labels_.find(subject);
    if (it == subject_labels_.end()) throw ValueError("unknown subject " + subject);
    return it->second;
}

std::vector<int> Batch::subject_labels() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.subject_label);
    return out;
}

std::vector<int> Batch::view_labels() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.view_label);
    return out;
}

namespace {

// First `count` entries of a seeded partial Fisher-Yates shuffle.
std::vector<int> choose_without_replacement(int population, int count, Rng& rng) {
    std::vector<int> pool(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, population - 1));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

}  // namespace

Batch sample_batch(const LoadedDataset& data, int subjects_per_batch, int seqs_per_subject,
                   int frames_per_seq, Rng& rng) {
    const auto& subjects = data.index().subject_records;
    if (static_cast<int>(subjects.size()) < 2) {
        throw ValueError("sample_batch: fewer than 2 subjects available");
    }
    if (static_cast<int>(subjects.size()) < subjects_per_batch) {
        throw ValueError("sample_batch: " + std::to_string(subjects.size()) +
                         " subjects available, batch needs " +
                         std::to_string(subjects_per_batch));
    }
    if (subjects_per_batch < 2 || seqs_per_subject < 1 || frames_per_seq < 1) {
        throw ValueError("sample_batch: P must be >= 2, K and T_s must be >= 1");
    }

    std::vector<const std::vector<int>*> per_subject;
    std::vector<std::string> names;
    for (const auto& [name, recs] : subjects) {
        names.push_back(name);
        per_subject.push_back(&recs);
    }

    Batch batch;
    const auto chosen =
        choose_without_replacement(static_cast<int>(subjects.size()), subjects_per_batch, rng);
    for (const int si : chosen) {
        const auto& recs = *per_subject[static_cast<std::size_t>(si)];
        const int avail = static_cast<int>(recs.size());
        std::vector<int> picks;
        if (avail >= seqs_per_subject) {
            for (const int p : choose_without_replacement(avail, seqs_per_subject, rng)) {
                picks.push_back(recs[static_cast<std::size_t>(p)]);
            }
        } else {
            batch.replacement_used = true;
            for (int k = 0; k < seqs_per_subject; ++k) {
                picks.push_back(recs[static_cast<std::size_t>(rng.uniform_int(0, avail - 1))]);
            }
        }
        for (const int seq_idx : picks) {
            const auto& seq = data.sequence(seq_idx);
            const int t = static_cast<int>(seq.frames.size());
            std::vector<int> frame_ids;
            if (t >= frames_per_seq) {
                frame_ids = choose_without_replacement(t, frames_per_seq, rng);
            } else {
                for (int i = 0; i < frames_per_seq; ++i) {
                    frame_ids.push_back(static_cast<int>(rng.uniform_int(0, t - 1)));
                }
            }
            std::sort(frame_ids.begin(), frame_ids.end());

            BatchEntry entry;
            entry.sequence = seq_idx;
            const auto& rec = data.index().records[static_cast<std::size_t>(seq_idx)];
            entry.subject_label = data.subject_label(rec.subject);
            entry.view_label = rec.view_label;
            for (const int fi : frame_ids) {
                entry.frames.push_back(&seq.frames[static_cast<std::size_t>(fi)]);
            }
            batch.entries.push_back(std::move(entry));
        }
    }
    return batch;
}

namespace {

TensorPtr frame_to_tensor(const Frame& f) {
    std::vector<double> values(f.pixels.size());
    for (std::size_t i = 0; i < f.pixels.size(); ++i) {
        values[i] = f.pixels[i] >= 128 ? 1.0 : 0.0;
    }
    return tensor({1, f.h, f.w}, std::move(values));
}

}  // namespace

std::vector<TensorPtr> frames_to_tensors(std::span<const Frame* const> frames) {
    std::vector<TensorPtr> out;
    out.reserve(frames.size());
    for (const Frame* f : frames) out.push_back(frame_to_tensor(*f));
    return out;
}

std::vector<TensorPtr> frames_to_tensors(std::span<const Frame> frames) {
    std::vector<TensorPtr> out;
    out.reserve(frames.size());
    for (const Frame& f : frames) out.push_back(frame_to_tensor(f));
    return out;
}

}  // namespace vige
