#include "palm/rmax.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace palm {

namespace {
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}
}  // namespace

TabularModel::TabularModel(std::string lamdp_name, std::string phi_sig, int m, double gamma,
                           double value_max)
    : lamdp_name_(std::move(lamdp_name)),
      phi_sig_(std::move(phi_sig)),
      m_(m),
      gamma_(gamma),
      value_max_(value_max) {
    if (m_ < 1) throw ConfigError("known threshold m must be positive");
}

bool TabularModel::observe(const std::string& s, const std::string& a, const std::string& s2,
                           double r, bool child_known) {
    if (frozen_) return true;
    bool was_known = is_known(s, a);
    if (!child_known) return was_known;
    Pair& p = table_[sa_key(s, a)];
    p.n += 1;
    Outcome& o = p.next[s2];
    o.n += 1;
    o.reward_sum += r;
    changelog_.push_back({s, a});
    return was_known;
}

bool TabularModel::is_known(const std::string& s, const std::string& a) const {
    if (frozen_) return true;
    auto it = table_.find(sa_key(s, a));
    return it != table_.end() && it->second.n >= m_;
}

TabularModel::Prediction TabularModel::predicted(const std::string& s,
                                                 const std::string& a) const {
    auto it = table_.find(sa_key(s, a));
    if (it == table_.end() || it->second.n < m_) {
        if (frozen_) return {PredictionKind::frozen_unseen, {}};
        return {PredictionKind::optimistic, {}};
    }
    Prediction out{PredictionKind::known, {}};
    double n = static_cast<double>(it->second.n);
    for (const auto& [key, o] : it->second.next) {
        out.transitions.push_back(
            {key, static_cast<double>(o.n) / n, o.reward_sum / static_cast<double>(o.n)});
    }
    return out;
}

std::int64_t TabularModel::unknown_pair_count() const {
    if (frozen_) return 0;
    std::int64_t c = 0;
    for (const auto& [_, p] : table_)
        if (p.n < m_) ++c;
    return c;
}

std::string TabularModel::serialize() const {
    std::string body;
    char buf[512];
    snprintf(buf, sizeof(buf), "palm-model 1\nlamdp %s\nphi_sig %s\nm %d\ngamma %.17g\nvmax %.17g\nfrozen %d\n",
             lamdp_name_.c_str(), phi_sig_.c_str(), m_, gamma_, value_max_, frozen_ ? 1 : 0);
    body = buf;
    std::vector<const std::pair<const std::string, Pair>*> rows;
    rows.reserve(table_.size());
    for (const auto& kv : table_) rows.push_back(&kv);
    std::sort(rows.begin(), rows.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
    std::int64_t nrows = 0;
    for (const auto* kv : rows) nrows += static_cast<std::int64_t>(kv->second.next.size());
    body += "rows " + std::to_string(nrows) + "\n";
    for (const auto* kv : rows) {
        auto sep = kv->first.find('\x1f');
        std::string s = kv->first.substr(0, sep);
        std::string a = kv->first.substr(sep + 1);
        for (const auto& [s2, o] : kv->second.next) {
            snprintf(buf, sizeof(buf), "%" PRId64 "\t%a\n", o.n, o.reward_sum);
            body += s + "\t" + a + "\t" + s2 + "\t" + buf;
        }
    }
    char csum[32];
    snprintf(csum, sizeof(csum), "checksum %016llx\n",
             static_cast<unsigned long long>(fnv1a(body)));
    return body + csum;
}

TabularModel TabularModel::deserialize(const std::string& bytes) {
    auto csum_pos = bytes.rfind("checksum ");
    if (csum_pos == std::string::npos) throw ConfigError("model file: missing checksum");
    std::string body = bytes.substr(0, csum_pos);
    std::string declared = bytes.substr(csum_pos + 9, 16);
    char expect[32];
    snprintf(expect, sizeof(expect), "%016llx", static_cast<unsigned long long>(fnv1a(body)));
    if (declared != expect) throw ConfigError("model file: checksum mismatch");

    std::istringstream in(body);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "palm-model" || version != 1)
        throw ConfigError("model file: unsupported format/version");
    TabularModel m;
    std::string key;
    std::int64_t nrows = -1;
    while (in >> key) {
        if (key == "lamdp") in >> m.lamdp_name_;
        else if (key == "phi_sig") in >> m.phi_sig_;
        else if (key == "m") in >> m.m_;
        else if (key == "gamma") in >> m.gamma_;
        else if (key == "vmax") in >> m.value_max_;
        else if (key == "frozen") {
            int f;
            in >> f;
            m.frozen_ = f != 0;
        } else if (key == "rows") {
            in >> nrows;
            in.ignore();
            break;
        } else {
            throw ConfigError("model file: unknown header field " + key);
        }
    }
    if (nrows < 0) throw ConfigError("model file: missing rows header");
    std::string line;
    std::int64_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 5) throw ConfigError("model file: malformed row");
        Pair& p = m.table_[sa_key(f[0], f[1])];
        Outcome& o = p.next[f[2]];
        o.n = std::stoll(f[3]);
        o.reward_sum = std::strtod(f[4].c_str(), nullptr);
        p.n += o.n;
        ++seen;
    }
    if (seen != nrows) throw ConfigError("model file: row count mismatch");
    return m;
}

}  // namespace palm
