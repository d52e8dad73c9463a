#include <array>
#include <cmath>

#include "common.hpp"
#include "threatbench/core/error.hpp"

namespace threatbench::synth {
namespace {

const std::array<const char*, 4> kLegitAttachments{"none", "pdf", "docx", "xlsx"};
const std::vector<double> kLegitAttachmentWeights{0.60, 0.20, 0.12, 0.08};
const std::array<const char*, 4> kPhishAttachments{"none", "html", "zip", "docx"};
const std::vector<double> kPhishAttachmentWeights{0.45, 0.25, 0.20, 0.10};

struct Email {
    double html = 0, links = 0, domains = 0, spf_fail = 0, internal = 0;
    double reputation = 1, suspicious = 0, login_form = 0, hour = 0;
    std::string attachment;
};

// Legitimate mail carries reputation in [0.55, 1]; phishing in [0, 0.45].
// With zero noise this keeps the classes linearly separable on reputation.
Email legit_email(RngStream& rng) {
    Email e;
    e.html = rng.bernoulli(0.45) ? 1 : 0;
    e.links = static_cast<double>(rng.poisson(1.5));
    e.domains = std::min(e.links, static_cast<double>(rng.poisson(0.3) + (e.links > 0 ? 1 : 0)));
    e.spf_fail = 0;
    e.internal = rng.bernoulli(0.7) ? 1 : 0;
    e.reputation = 0.55 + 0.45 * std::sqrt(rng.uniform());
    e.suspicious = static_cast<double>(rng.poisson(0.3));
    e.login_form = 0;
    e.attachment = kLegitAttachments[rng.categorical(kLegitAttachmentWeights)];
    return e;
}

Email phishing_email(RngStream& rng) {
    Email e;
    e.html = rng.bernoulli(0.9) ? 1 : 0;
    e.links = static_cast<double>(rng.poisson(4.0) + 1);
    e.domains = std::min(e.links, static_cast<double>(rng.poisson(1.5) + 1));
    e.spf_fail = rng.bernoulli(0.7) ? 1 : 0;
    e.internal = rng.bernoulli(0.1) ? 1 : 0;
    e.reputation = 0.45 * rng.uniform();
    e.suspicious = static_cast<double>(rng.poisson(4.0) + 1);
    e.login_form = rng.bernoulli(0.6) ? 1 : 0;
    e.attachment = kPhishAttachments[rng.categorical(kPhishAttachmentWeights)];
    return e;
}

// Legitimate mail that trips surface checks: SPF failure and extra links.
void make_suspicious(Email& e, RngStream& rng) {
    e.spf_fail = 1;
    e.links += static_cast<double>(rng.poisson(3.0));
    e.reputation = 0.5 + 0.3 * rng.uniform();
}

// Phishing that passes surface checks; reputation and wording still give it away.
void make_clean_looking(Email& e, RngStream& rng) {
    e.spf_fail = 0;
    e.html = 0;
    e.login_form = 0;
    e.internal = 1;
    e.reputation = 0.3 + 0.15 * rng.uniform();
}

} // namespace

Synthetic generate_email_corpus(const GeneratorConfig& config) {
    detail::validate_tabular(config, "generate_email_corpus");
    const double noise = config.email.noise_fraction;
    if (!(noise >= 0.0 && noise < 0.5)) {
        throw ConfigError("generate_email_corpus: noise_fraction must lie in [0, 0.5)");
    }
    const RngStream root(config.seed, "email");
    const auto positive = detail::choose_positive_rows(config.n, config.anomaly_rate, root);

    // Exactly round(class_count * noise) rows per class are crossed.
    std::vector<std::size_t> legit_rows, phish_rows;
    for (std::size_t i = 0; i < config.n; ++i) {
        (positive[i] ? phish_rows : legit_rows).push_back(i);
    }
    std::vector<char> crossed(config.n, 0);
    auto noise_rng = root.child("noise-rows");
    for (const auto* rows : {&legit_rows, &phish_rows}) {
        const auto k = exact_anomaly_count(rows->size(), noise);
        for (auto j : noise_rng.sample_without_replacement(rows->size(), k)) {
            crossed[(*rows)[j]] = 1;
        }
    }

    const std::size_t n = config.n;
    std::vector<double> html(n), links(n), domains(n), spf(n), internal(n), rep(n), words(n),
        login(n), hour(n), label(n);
    std::vector<std::string> attachment(n), pattern(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = root.child("row", i);
        Email e = positive[i] ? phishing_email(rng) : legit_email(rng);
        if (crossed[i]) {
            if (positive[i]) {
                make_clean_looking(e, rng);
                pattern[i] = "phish_clean_surface";
            } else {
                make_suspicious(e, rng);
            }
        } else if (positive[i]) {
            pattern[i] = "phish";
        }
        e.hour = static_cast<double>(rng.uniform_int(24));
        html[i] = e.html;
        links[i] = e.links;
        domains[i] = e.domains;
        spf[i] = e.spf_fail;
        internal[i] = e.internal;
        rep[i] = e.reputation;
        words[i] = e.suspicious;
        login[i] = e.login_form;
        hour[i] = e.hour;
        attachment[i] = std::move(e.attachment);
        label[i] = positive[i] ? 1.0 : 0.0;
    }

    Synthetic out;
    out.data.add_numeric({"has_html", ColumnKind::binary}, std::move(html));
    out.data.add_numeric({"num_links", ColumnKind::numeric}, std::move(links));
    out.data.add_numeric({"num_domains", ColumnKind::numeric}, std::move(domains));
    out.data.add_numeric({"has_spf_fail", ColumnKind::binary}, std::move(spf));
    out.data.add_numeric({"is_from_internal", ColumnKind::binary}, std::move(internal));
    out.data.add_numeric({"sender_reputation_score", ColumnKind::numeric}, std::move(rep));
    out.data.add_numeric({"num_suspicious_words", ColumnKind::numeric}, std::move(words));
    out.data.add_numeric({"has_login_form", ColumnKind::binary}, std::move(login));
    out.data.add_numeric({"hour_sent", ColumnKind::numeric}, std::move(hour));
    out.data.add_categorical("attachment_type", std::move(attachment));
    out.data.add_numeric({"label", ColumnKind::label}, std::move(label));
    out.pattern = std::move(pattern);
    return out;
}

} // namespace threatbench::synth
