#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace yudovich::cli {

using json = nlohmann::json;

enum ExitCode { ok = 0, schema_error = 2, numerical_failure = 3, early_termination = 4 };

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

struct EmittedFile {
    std::string name;
    std::string content;
};

struct Outcome {
    int exit = ok;
    std::string status = "ok";
    json diagnostics = json::object();
    std::vector<EmittedFile> files;
};

/// Parses and validates the scenario, runs its pipeline. `subcommand` must match the scenario kind.
/// SchemaError for anything the schema rejects; library errors propagate.
Outcome run_pipeline(const std::string& subcommand, const json& scenario, const Overrides& ov);

/// Full run: reads the file, runs, writes outputs + manifest.json into `out_dir`.
/// Schema errors write nothing; numerical failures write the manifest only.
int run_scenario(const std::string& subcommand, const std::string& path, const std::string& out_dir,
                 const Overrides& ov, std::string* message = nullptr);

/// RFC-4180 CSV with round-trip number formatting.
class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    Csv& row(const std::vector<double>& values);
    Csv& row(const std::vector<std::string>& fields);
    std::string str() const { return out_; }
    static std::string number(double v);

private:
    std::size_t width_;
    std::string out_;
};

std::string sha256_hex(const std::string& data);

struct CheckLine {
    std::string name;
    enum class State { pass, fail, skip } state = State::pass;
    std::string detail;
};

struct SelfCheckOptions {
    bool disk_only = false;
    int annulus_images = 0;  // fault injection: truncate the annulus image series
};

std::vector<CheckLine> self_check(const SelfCheckOptions& opts);

}  // namespace yudovich::cli
