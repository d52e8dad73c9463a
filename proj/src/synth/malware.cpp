#include <array>
#include <cmath>

#include "common.hpp"

namespace threatbench::synth {
namespace {

using detail::clip;

const std::array<const char*, 5> kFileTypes{"dll", "exe", "msi", "scr", "sys"};
const std::vector<double> kBenignTypeWeights{0.35, 0.45, 0.07, 0.03, 0.10};
const std::vector<double> kMaliciousTypeWeights{0.15, 0.55, 0.03, 0.22, 0.05};

struct FileRecord {
    double size = 0, entropy = 0, imports = 0, strings = 0, nop = 0, jmp = 0;
    double signature = 0, sections = 1, packed = 0, packer_ratio = 0;
    std::string type;
};

FileRecord benign_file(const MalwareParams& p, RngStream& rng) {
    FileRecord f;
    f.size = std::round(rng.lognormal(13.0, 1.0));
    f.entropy = clip(rng.normal(p.benign_entropy_mean, p.entropy_sd), 0.0, 8.0);
    f.imports = std::max(0.0, std::round(rng.normal(120.0, 40.0)));
    f.strings = std::round(rng.lognormal(7.0, 0.8));
    f.nop = clip(rng.normal(0.25, 0.07), 0.0, 1.0);
    f.jmp = clip(rng.normal(0.35, 0.08), 0.0, 1.0);
    f.signature = rng.bernoulli(p.benign_signed_rate) ? 1 : 0;
    f.sections = std::max(1.0, std::round(rng.normal(5.0, 1.2)));
    f.packed = rng.bernoulli(p.benign_packed_rate) ? 1 : 0;
    f.packer_ratio = rng.lognormal(-1.0, 0.5);
    f.type = kFileTypes[rng.categorical(kBenignTypeWeights)];
    return f;
}

// Packing raises entropy; obfuscation pushes opcode ratios to extremes.
FileRecord malicious_file(const MalwareParams& p, bool obfuscated, RngStream& rng) {
    FileRecord f;
    f.size = std::round(rng.lognormal(12.0, 1.3));
    f.entropy = clip(rng.normal(p.malicious_entropy_mean, p.entropy_sd), 0.0, 8.0);
    f.imports = std::max(0.0, std::round(rng.normal(40.0, 25.0)));
    f.strings = std::round(rng.lognormal(5.5, 1.0));
    if (obfuscated) {
        f.nop = clip(rng.normal(0.55, 0.10), 0.0, 1.0);
        f.jmp = clip(rng.normal(0.65, 0.10), 0.0, 1.0);
    } else {
        f.nop = clip(rng.normal(0.30, 0.10), 0.0, 1.0);
        f.jmp = clip(rng.normal(0.45, 0.12), 0.0, 1.0);
    }
    f.signature = rng.bernoulli(p.malicious_signed_rate) ? 1 : 0;
    f.sections = rng.bernoulli(0.5) ? std::max(1.0, std::round(rng.normal(2.5, 1.0)))
                                    : std::round(rng.normal(9.0, 1.5));
    f.sections = std::max(1.0, f.sections);
    f.packed = rng.bernoulli(p.malicious_packed_rate) ? 1 : 0;
    f.packer_ratio = rng.lognormal(0.3, 0.5);
    f.type = kFileTypes[rng.categorical(kMaliciousTypeWeights)];
    return f;
}

// Malware that mostly blends in: benign-shaped features with a mild entropy lift.
FileRecord stealth_file(const MalwareParams& p, RngStream& rng) {
    FileRecord f = benign_file(p, rng);
    f.entropy = clip(rng.normal(0.5 * (p.benign_entropy_mean + p.malicious_entropy_mean),
                                p.entropy_sd),
                     0.0, 8.0);
    f.signature = rng.bernoulli(p.malicious_signed_rate * 2.0) ? 1 : 0;
    f.packer_ratio = rng.lognormal(-0.5, 0.5);
    return f;
}

} // namespace

Synthetic generate_malware_corpus(const GeneratorConfig& config) {
    detail::validate_tabular(config, "generate_malware_corpus");
    const auto& p = config.malware;
    const RngStream root(config.seed, "malware");
    const auto positive = detail::choose_positive_rows(config.n, config.anomaly_rate, root);

    const std::size_t n = config.n;
    std::vector<double> size(n), entropy(n), imports(n), strings(n), nop(n), jmp(n), sig(n),
        sections(n), packed(n), ratio(n), label(n);
    std::vector<std::string> type(n), pattern(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = root.child("row", i);
        FileRecord f;
        if (positive[i]) {
            if (rng.bernoulli(p.stealth_fraction)) {
                f = stealth_file(p, rng);
                pattern[i] = "stealth";
            } else {
                const bool obfuscated = rng.bernoulli(0.4);
                f = malicious_file(p, obfuscated, rng);
                pattern[i] = obfuscated ? "obfuscated" : "packed";
            }
        } else {
            f = benign_file(p, rng);
        }
        size[i] = f.size;
        entropy[i] = f.entropy;
        imports[i] = f.imports;
        strings[i] = f.strings;
        nop[i] = f.nop;
        jmp[i] = f.jmp;
        sig[i] = f.signature;
        sections[i] = f.sections;
        packed[i] = f.packed;
        ratio[i] = f.packer_ratio;
        type[i] = std::move(f.type);
        label[i] = positive[i] ? 1.0 : 0.0;
    }

    Synthetic out;
    out.data.add_numeric({"file_size", ColumnKind::numeric}, std::move(size));
    out.data.add_numeric({"entropy", ColumnKind::numeric}, std::move(entropy));
    out.data.add_numeric({"num_imports", ColumnKind::numeric}, std::move(imports));
    out.data.add_numeric({"num_strings", ColumnKind::numeric}, std::move(strings));
    out.data.add_numeric({"opcode_NOP_ratio", ColumnKind::numeric}, std::move(nop));
    out.data.add_numeric({"opcode_JMP_ratio", ColumnKind::numeric}, std::move(jmp));
    out.data.add_numeric({"has_digital_signature", ColumnKind::binary}, std::move(sig));
    out.data.add_numeric({"section_count", ColumnKind::numeric}, std::move(sections));
    out.data.add_numeric({"is_packed", ColumnKind::binary}, std::move(packed));
    out.data.add_numeric({"packer_entropy_ratio", ColumnKind::numeric}, std::move(ratio));
    out.data.add_categorical("file_type", std::move(type));
    out.data.add_numeric({"label", ColumnKind::label}, std::move(label));
    out.pattern = std::move(pattern);
    return out;
}

} // namespace threatbench::synth
