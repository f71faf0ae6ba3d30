#pragma once

#include "vsd/disambig.hpp"
#include "vsd/imagerep.hpp"
#include "vsd/inventory.hpp"
#include "vsd/supervised.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vsd {

// Reads the dataset JSONL (one ImageRecord per line) and checks every verb
// and gold sense against the inventory. Image ids must be unique.
std::vector<ImageRecord> load_dataset(const std::filesystem::path& path, const SenseInventory& inv);
std::vector<ImageRecord> parse_dataset(std::string_view text, const SenseInventory& inv);
void save_dataset(std::span<const ImageRecord> records, const std::filesystem::path& path);

// Fraction of predictions matching `gold` (image id -> sense id).
// Throws EmptyInput for no predictions, MissingKey for an image without gold.
double accuracy(std::span<const Prediction> preds, const std::map<std::string, std::string, std::less<>>& gold);

std::map<std::string, std::string, std::less<>> gold_map(std::span<const ImageRecord> records);

enum class ClassFilter { Motion, NonMotion, All };
std::string_view to_string(ClassFilter f);
ClassFilter parse_class_filter(std::string_view s);

std::vector<ImageRecord> filter_by_class(std::span<const ImageRecord> records, const SenseInventory& inv,
                                         ClassFilter filter);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

struct GridCell {
    Channel channel = Channel::O;
    Fusion fusion = Fusion::None;

    bool operator==(const GridCell&) const = default;
};

std::string cell_name(const GridCell& cell);

// The 10 cells of the full table: O, C, O+C, CNN, then CNN+O, CNN+C, CNN+O+C
// under both concat and cca fusion.
std::vector<GridCell> full_grid();

struct GridSpec {
    Setting setting = Setting::Gold;
    ClassFilter verb_class = ClassFilter::All;
    std::vector<GridCell> cells = full_grid();
    std::optional<double> lambda_t;  // defaults depend on the setting
    std::optional<double> lambda_c;
    double pred_threshold = 0.2;
    TextPooling pooling = TextPooling::Pool;
    CcaCombine cca_combine = CcaCombine::Interpolate;
    bool depictable_only = true;
    bool lesk_include_examples = false;
    unsigned jobs = 1;

    RepConfig config_for(const GridCell& cell) const;
};

struct CellResult {
    GridCell cell;
    std::optional<double> accuracy;  // absent when the cell could not run
    std::size_t fallbacks = 0;
    std::string absent_reason;
    std::vector<Prediction> predictions;
};

struct EvalReport {
    Setting setting = Setting::Gold;
    ClassFilter verb_class = ClassFilter::All;
    std::vector<CellResult> cells;
    double fs = 0;
    double mfs = 0;
    double lesk = 0;
    std::size_t images = 0;
    std::size_t verbs = 0;
    std::size_t fallbacks = 0;                // summed over cells
    std::size_t single_candidate_images = 0;  // verb has < 2 candidate senses

    const CellResult* find(const GridCell& cell) const;
};

// Evaluates every requested cell plus the first-sense, most-frequent-sense
// and original-Lesk baselines on the records of the requested verb class.
// MFS counts come from those same records, which makes it an upper bound
// among constant-per-verb predictors. A cell whose resources are missing is
// reported as absent; the run continues.
EvalReport run_grid(std::span<const ImageRecord> dataset, const Resources& res, const GridSpec& spec);

nlohmann::json report_to_json(const EvalReport& report);
// Plain-text table, columns in the order of full_grid().
std::string render_report(const EvalReport& report);

// --- supervised experiments -------------------------------------------------

// Normalized text block and/or normalized visual block, concatenated.
// A text side without coverage contributes a zero block.
DenseVector supervised_features(const ImageRecord& rec, Channel channel, Setting setting, const Resources& res,
                                double pred_threshold = 0.2);

struct SupervisedSpec {
    Setting setting = Setting::Gold;
    ClassFilter verb_class = ClassFilter::All;
    std::vector<Channel> channels = {Channel::O, Channel::C, Channel::O_C, Channel::CNN,
                                     Channel::CNN_O, Channel::CNN_C, Channel::CNN_O_C};
    LrParams params;
    double split_ratio = 0.8;
    std::uint64_t split_seed = 0;
    std::size_t min_images = 20;
    double pred_threshold = 0.2;
    unsigned jobs = 1;
};

struct SupervisedRow {
    Channel channel = Channel::O;
    std::optional<double> accuracy;
    std::string absent_reason;
};

struct SupervisedReport {
    Setting setting = Setting::Gold;
    ClassFilter verb_class = ClassFilter::All;
    std::vector<std::string> verbs;  // selected verbs
    std::size_t images = 0;          // images of the selected verbs
    std::size_t train_images = 0;
    std::size_t test_images = 0;
    double fs = 0;   // over all images of the selected verbs
    double mfs = 0;  // idem
    std::vector<SupervisedRow> rows;
    std::map<std::string, std::vector<LrModel>> models;  // channel name -> one model per verb
};

SupervisedReport run_supervised(std::span<const ImageRecord> dataset, const Resources& res,
                                const SupervisedSpec& spec);

nlohmann::json supervised_report_to_json(const SupervisedReport& report);
std::string render_supervised_report(const SupervisedReport& report);

}  // namespace vsd
