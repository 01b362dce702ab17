#include "vige/config.hpp"

#include <fstream>
#include <sstream>

namespace vige {

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ValueError("train: learning rate must be positive");
    if (iterations < 1) throw ValueError("train: iterations must be >= 1");
    if (subjects_per_batch < 2) throw ValueError("train: P must be >= 2");
    if (seqs_per_subject < 2) throw ValueError("train: K must be >= 2 for triplet mining");
    if (frames_per_seq < 1) throw ValueError("train: frames per sequence must be >= 1");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw ValueError("train: betas must lie in [0,1)");
    }
    if (adam_eps <= 0.0) throw ValueError("train: adam eps must be positive");
    if (lr_drop && (lr_drop->first <= 0.0 || lr_drop->second < 1)) {
        throw ValueError("train: lr drop needs a positive factor and iteration");
    }
    weights.validate();
}

double TrainConfig::lr_at(std::int64_t iteration) const {
    if (lr_drop && iteration >= lr_drop->second) return lr * lr_drop->first;
    return lr;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ValueError("expected a boolean, got '" + s + "'");
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("config line " + std::to_string(line_no) +
                              ": expected key = value, got '" + line + "'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw FormatError("config line " + std::to_string(line_no) + ": empty key");
        }
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str());
}

std::string encode_configs(const ModelConfig& model, const TrainConfig& train) {
    std::ostringstream os;
    os.precision(17);
    os << "widths = " << join_ints(model.backbone.widths) << "\n";
    os << "kernel = " << model.backbone.kernel << "\n";
    os << "slope = " << model.backbone.slope << "\n";
    os << "pool = " << model.backbone.pool << "\n";
    os << "emit-global = " << (model.backbone.emit_global ? "true" : "false") << "\n";
    os << "input-h = " << model.backbone.input_h << "\n";
    os << "input-w = " << model.backbone.input_w << "\n";
    os << "scales = " << join_ints(model.pyramid.scales) << "\n";
    os << "out-dim = " << model.pyramid.out_dim << "\n";
    os << "view-dim = " << model.view_dim << "\n";
    os << "num-views = " << model.num_views << "\n";
    os << "baseline = " << (model.bank_enabled ? "false" : "true") << "\n";
    os << "placement = " << to_string(model.placement) << "\n";
    os << "shared = " << (model.shared_bank ? "true" : "false") << "\n";
    os << "init-scheme = " << to_string(model.init_scheme) << "\n";
    os << "init-eps = " << model.init_eps << "\n";
    os << "model-seed = " << model.seed << "\n";
    os << "lr = " << train.lr << "\n";
    if (train.lr_drop) {
        os << "lr-drop-factor = " << train.lr_drop->first << "\n";
        os << "lr-drop-at = " << train.lr_drop->second << "\n";
    }
    os << "iterations = " << train.iterations << "\n";
    os << "batch-p = " << train.subjects_per_batch << "\n";
    os << "batch-k = " << train.seqs_per_subject << "\n";
    os << "frames-per-seq = " << train.frames_per_seq << "\n";
    os << "lambda-ce = " << train.weights.lambda_ce << "\n";
    os << "lambda-trip = " << train.weights.lambda_trip << "\n";
    os << "margin = " << train.weights.margin << "\n";
    os << "beta1 = " << train.beta1 << "\n";
    os << "beta2 = " << train.beta2 << "\n";
    os << "adam-eps = " << train.adam_eps << "\n";
    os << "seed = " << train.seed << "\n";
    os << "selection-mode = " << to_string(train.selection) << "\n";
    return os.str();
}

void decode_configs(const std::string& text, ModelConfig& model, TrainConfig& train) {
    const auto kv = parse_kv_text(text);
    std::optional<double> drop_factor;
    std::optional<std::int64_t> drop_at;
    for (const auto& [key, value] : kv) {
        if (key == "widths") model.backbone.widths = parse_int_list(value);
        else if (key == "kernel") model.backbone.kernel = std::stoi(value);
        else if (key == "slope") model.backbone.slope = std::stod(value);
        else if (key == "pool") model.backbone.pool = std::stoi(value);
        else if (key == "emit-global") model.backbone.emit_global = parse_bool(value);
        else if (key == "input-h") model.backbone.input_h = std::stoi(value);
        else if (key == "input-w") model.backbone.input_w = std::stoi(value);
        else if (key == "scales") model.pyramid.scales = parse_int_list(value);
        else if (key == "out-dim") model.pyramid.out_dim = std::stoi(value);
        else if (key == "view-dim") model.view_dim = std::stoi(value);
        else if (key == "num-views") model.num_views = std::stoi(value);
        else if (key == "baseline") model.bank_enabled = !parse_bool(value);
        else if (key == "placement") model.placement = placement_from_string(value);
        else if (key == "shared") model.shared_bank = parse_bool(value);
        else if (key == "init-scheme") model.init_scheme = init_scheme_from_string(value);
        else if (key == "init-eps") model.init_eps = std::stod(value);
        else if (key == "model-seed") model.seed = std::stoull(value);
        else if (key == "lr") train.lr = std::stod(value);
        else if (key == "lr-drop-factor") drop_factor = std::stod(value);
        else if (key == "lr-drop-at") drop_at = std::stoll(value);
        else if (key == "iterations") train.iterations = std::stoll(value);
        else if (key == "batch-p") train.subjects_per_batch = std::stoi(value);
        else if (key == "batch-k") train.seqs_per_subject = std::stoi(value);
        else if (key == "frames-per-seq") train.frames_per_seq = std::stoi(value);
        else if (key == "lambda-ce") train.weights.lambda_ce = std::stod(value);
        else if (key == "lambda-trip") train.weights.lambda_trip = std::stod(value);
        else if (key == "margin") train.weights.margin = std::stod(value);
        else if (key == "beta1") train.beta1 = std::stod(value);
        else if (key == "beta2") train.beta2 = std::stod(value);
        else if (key == "adam-eps") train.adam_eps = std::stod(value);
        else if (key == "seed") train.seed = std::stoull(value);
        else if (key == "selection-mode") train.selection = selection_mode_from_string(value);
        else throw ValueError("unknown config key '" + key + "'");
    }
    if (drop_factor.has_value() != drop_at.has_value()) {
        throw ValueError("lr-drop-factor and lr-drop-at must be given together");
    }
    if (drop_factor) train.lr_drop = {*drop_factor, *drop_at};
}

}  // namespace vige
