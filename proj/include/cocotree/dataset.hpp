#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cocotree {

// Two images, two captions; caption_t belongs to image_t.
struct QuadrupletSample {
    std::string id;
    std::string image_0;
    std::string image_1;
    std::string caption_0;
    std::string caption_1;
    std::vector<std::string> tags;
};

// One image with a matching and a distractor caption.
struct PairSample {
    std::string id;
    std::string image;
    std::string caption_pos;
    std::string caption_neg;
    std::string category;
};

enum class DatasetKind { quadruplet, pair };

const char* dataset_kind_name(DatasetKind kind);

struct Dataset {
    std::string name;
    DatasetKind kind = DatasetKind::quadruplet;
    std::vector<QuadrupletSample> quadruplets;
    std::vector<PairSample> pairs;
    std::vector<std::string> warnings;  // skipped-record diagnostics

    size_t size() const {
        return kind == DatasetKind::quadruplet ? quadruplets.size() : pairs.size();
    }
};

// Loads a manifest (JSON: name, kind, records path, optional sample_count
// and seed) plus its JSON-lines record file. Corrupt records are skipped
// with a warning; zero usable records is a dataset error. When the manifest
// asks for fewer samples than exist, a seeded shuffle picks the subset
// (manifest seed wins over default_seed) and original order is restored.
Dataset load_dataset(const std::filesystem::path& manifest_path, std::uint64_t default_seed);

}  // namespace cocotree
