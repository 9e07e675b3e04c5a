#include "canopy/fusion/ensemble.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "canopy/numerics/binary_io.hpp"

namespace canopy::fusion {

const model::ModelConfig& Ensemble::config() const {
    if (members.empty()) throw Error("ensemble: no members");
    return members.front().config;
}

void Ensemble::validate() const {
    if (members.empty()) throw Error("ensemble: no members");
    for (std::size_t i = 1; i < members.size(); ++i) {
        if (!(members[i].config == members[0].config)) {
            throw Error("ensemble: member " + std::to_string(i) + " has a different architecture");
        }
    }
    if (stats.channel_mean.size() != static_cast<std::size_t>(members[0].config.in_channels())) {
        throw Error("ensemble: normalization does not match the input channels");
    }
}

void save_ensemble(const std::filesystem::path& dir, const Ensemble& ensemble) {
    ensemble.validate();
    std::filesystem::create_directories(dir);
    std::ostringstream index;
    index << "canopy-ensemble\nversion 1\n";
    index << "assignment_seed " << ensemble.assignment_seed << '\n';
    index << "norm " << data::norm_stats_to_text(ensemble.stats) << '\n';
    for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
        const std::string name = "member" + std::to_string(i) + ".ckpt";
        numerics::write_checkpoint(dir / name, ensemble.members[i].to_checkpoint(0));
        index << "member " << name << '\n';
    }
    index << "end\n";
    io::write_file_atomic(dir / "ensemble.txt", index.str());
}

Ensemble load_ensemble(const std::filesystem::path& dir) {
    std::ifstream is(dir / "ensemble.txt");
    if (!is) throw FormatError("ensemble: cannot open " + (dir / "ensemble.txt").string());
    const auto lines = io::read_header_lines(is, "end");
    if (lines.empty() || lines[0] != "canopy-ensemble") throw FormatError("ensemble: bad magic");
    Ensemble e;
    bool have_norm = false;
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        std::istringstream ls(lines[i]);
        std::string key;
        ls >> key;
        if (key == "version") {
            int v = 0;
            if (!(ls >> v) || v != 1) throw FormatError("ensemble: unsupported version");
        } else if (key == "assignment_seed") {
            if (!(ls >> e.assignment_seed)) throw FormatError("ensemble: malformed assignment_seed");
        } else if (key == "norm") {
            e.stats = data::norm_stats_from_text(lines[i].substr(5));
            have_norm = true;
        } else if (key == "member") {
            std::string file;
            if (!(ls >> file)) throw FormatError("ensemble: malformed member line");
            e.members.push_back(model::NetworkParams::from_checkpoint(numerics::read_checkpoint(dir / file)));
        } else {
            throw FormatError("ensemble: unknown key '" + key + "'");
        }
    }
    if (!have_norm) throw FormatError("ensemble: missing norm line");
    e.validate();
    return e;
}

std::vector<int> assign_members(int dates, int members, std::uint64_t seed) {
    if (dates < 1 || members < 1) throw Error("assign_members: dates and members must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, members - 1);
    std::vector<int> out(static_cast<std::size_t>(dates));
    for (int& m : out) m = pick(rng);
    return out;
}

}  // namespace canopy::fusion
