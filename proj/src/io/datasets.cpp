#include "neurotree/io/datasets.hpp"

#include "neurotree/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>

namespace neurotree::io {

using nn::Tensor;

std::string_view to_string(SyntheticKind k)
{
    switch (k) {
    case SyntheticKind::Blobs: return "blobs";
    case SyntheticKind::Rings: return "rings";
    case SyntheticKind::Bars: return "bars";
    }
    return "?";
}

namespace {

struct ClassPattern {
    double cy, cx;
    double angle;
    double radius;
    std::vector<double> color;
};

double pattern_value(SyntheticKind kind, const ClassPattern& p, double y, double x, double sy, double sx, double scale)
{
    const double dy = y - (p.cy + sy);
    const double dx = x - (p.cx + sx);
    switch (kind) {
    case SyntheticKind::Blobs: {
        const double s = scale / 4.0;
        return std::exp(-(dy * dy + dx * dx) / (2 * s * s));
    }
    case SyntheticKind::Rings: {
        const double d = std::sqrt(dy * dy + dx * dx) - p.radius;
        return std::exp(-d * d / (2 * 0.7 * 0.7));
    }
    case SyntheticKind::Bars: {
        const double d = -dy * std::cos(p.angle) + dx * std::sin(p.angle);
        return std::exp(-d * d / (2 * 0.8 * 0.8));
    }
    }
    return 0.0;
}

/// Indices of `labels` grouped per class, in ascending order.
std::vector<std::vector<std::size_t>> by_class(const std::vector<std::int32_t>& labels, std::size_t classes)
{
    std::vector<std::vector<std::size_t>> out(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.at(static_cast<std::size_t>(labels[i])).push_back(i);
    }
    return out;
}

LabeledSplit take(const LabeledSplit& all, std::vector<std::size_t> idx)
{
    std::sort(idx.begin(), idx.end());
    LabeledSplit out;
    out.instances = nn::gather_rows(all.instances, idx);
    for (auto i : idx) {
        out.labels.push_back(all.labels[i]);
    }
    return out;
}

std::size_t class_count(const std::vector<std::int32_t>& labels)
{
    std::int32_t mx = -1;
    for (auto l : labels) {
        mx = std::max(mx, l);
    }
    return static_cast<std::size_t>(mx + 1);
}

} // namespace

std::pair<LabeledSplit, LabeledSplit> stratified_holdout(const LabeledSplit& all, double fraction, std::uint64_t seed)
{
    if (!(fraction >= 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("holdout fraction must lie in [0, 1)");
    }
    Rng rng(seed);
    std::vector<std::size_t> keep;
    std::vector<std::size_t> hold;
    for (auto& members : by_class(all.labels, class_count(all.labels))) {
        rng.shuffle(members);
        const auto k = static_cast<std::size_t>(std::llround(fraction * double(members.size())));
        hold.insert(hold.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
        keep.insert(keep.end(), members.begin() + static_cast<std::ptrdiff_t>(k), members.end());
    }
    return {take(all, keep), take(all, hold)};
}

DataPair make_synthetic(const SyntheticSpec& spec)
{
    if (spec.n < 30) {
        throw std::invalid_argument("synthetic datasets need n >= 30");
    }
    if (spec.classes < 2 || spec.height < 2 || spec.width < 2 || spec.channels < 1) {
        throw std::invalid_argument("synthetic datasets need >= 2 classes and >= 2x2 images");
    }
    Rng rng(spec.seed);
    const double H = double(spec.height);
    const double W = double(spec.width);
    const double scale = std::min(H, W);
    const double phase = rng.uniform(0, 2 * std::numbers::pi);

    std::vector<ClassPattern> patterns(spec.classes);
    for (std::size_t k = 0; k < spec.classes; ++k) {
        auto& p = patterns[k];
        const double a = phase + 2 * std::numbers::pi * double(k) / double(spec.classes);
        p.cy = (H - 1) / 2;
        p.cx = (W - 1) / 2;
        if (spec.kind == SyntheticKind::Blobs) {
            p.cy += scale / 4 * std::sin(a);
            p.cx += scale / 4 * std::cos(a);
        }
        p.angle = std::numbers::pi * double(k) / double(spec.classes);
        p.radius = (double(k) + 1) / (double(spec.classes) + 1) * scale / 2;
        for (std::size_t c = 0; c < spec.channels; ++c) {
            p.color.push_back(rng.uniform(0.4, 1.0));
        }
    }

    LabeledSplit all;
    all.instances = Tensor<float>({spec.n, spec.height, spec.width, spec.channels});
    all.labels.resize(spec.n);
    const std::size_t stride = spec.height * spec.width * spec.channels;
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto label = static_cast<std::int32_t>(i % spec.classes);
        all.labels[i] = label;
        const auto& p = patterns[static_cast<std::size_t>(label)];
        const double sy = rng.uniform(-0.75, 0.75);
        const double sx = rng.uniform(-0.75, 0.75);
        float* img = all.instances.data() + i * stride;
        for (std::size_t y = 0; y < spec.height; ++y) {
            for (std::size_t x = 0; x < spec.width; ++x) {
                const double v = pattern_value(spec.kind, p, double(y), double(x), sy, sx, scale);
                for (std::size_t c = 0; c < spec.channels; ++c) {
                    img[(y * spec.width + x) * spec.channels + c] =
                        static_cast<float>(v * p.color[c] + rng.normal(0.0, spec.noise));
                }
            }
        }
    }

    std::vector<std::size_t> train, val, test;
    for (auto& members : by_class(all.labels, spec.classes)) {
        rng.shuffle(members);
        const auto m = members.size();
        const auto n_train = static_cast<std::size_t>(std::llround(0.70 * double(m)));
        const auto n_val = static_cast<std::size_t>(std::llround(0.15 * double(m)));
        for (std::size_t j = 0; j < m; ++j) {
            (j < n_train ? train : j < n_train + n_val ? val : test).push_back(members[j]);
        }
    }
    DataPair d;
    d.n_classes = spec.classes;
    d.train = take(all, train);
    d.validation = take(all, val);
    d.test = take(all, test);
    return d;
}

LabeledSplit read_cifar10_batch(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw MissingFile(file);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t records = bytes.size() / kCifarRecordBytes;
    if (bytes.size() % kCifarRecordBytes != 0) {
        throw TruncatedRecord(file, records * kCifarRecordBytes);
    }
    LabeledSplit out;
    out.instances = Tensor<float>({records, kCifarSide, kCifarSide, 3});
    out.labels.resize(records);
    for (std::size_t r = 0; r < records; ++r) {
        const unsigned char* rec = bytes.data() + r * kCifarRecordBytes;
        const int label = rec[0];
        if (label >= kCifarClasses) {
            throw LabelOutOfRange(file, r * kCifarRecordBytes, label);
        }
        out.labels[r] = label;
        float* img = out.instances.data() + r * kCifarPixels * 3;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < kCifarPixels; ++p) {
                img[p * 3 + c] = float(rec[1 + c * kCifarPixels + p]) / 255.0f;
            }
        }
    }
    return out;
}

namespace {

LabeledSplit concat_splits(const std::vector<LabeledSplit>& parts)
{
    std::size_t n = 0;
    for (const auto& p : parts) {
        n += p.size();
    }
    LabeledSplit out;
    out.instances = Tensor<float>({n, kCifarSide, kCifarSide, 3});
    std::size_t at = 0;
    for (const auto& p : parts) {
        std::copy(p.instances.values.begin(), p.instances.values.end(), out.instances.values.begin() + static_cast<std::ptrdiff_t>(at));
        at += p.instances.size();
        out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    }
    return out;
}

} // namespace

DataPair load_cifar10(const std::filesystem::path& dir, double validation_fraction, std::uint64_t seed)
{
    std::vector<LabeledSplit> parts;
    for (int i = 1; i <= 5; ++i) {
        parts.push_back(read_cifar10_batch(dir / ("data_batch_" + std::to_string(i) + ".bin")));
    }
    DataPair d;
    d.n_classes = kCifarClasses;
    auto [train, val] = stratified_holdout(concat_splits(parts), validation_fraction, seed);
    d.train = std::move(train);
    d.validation = std::move(val);
    d.test = read_cifar10_batch(dir / "test_batch.bin");
    return d;
}

namespace {

struct ParsedId {
    std::string kind;
    std::map<std::string, std::string> kv;
};

ParsedId parse_id(const std::string& id)
{
    ParsedId out;
    const auto colon = id.find(':');
    out.kind = id.substr(0, colon);
    if (colon == std::string::npos) {
        return out;
    }
    std::string rest = id.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
        auto comma = rest.find(',', start);
        if (comma == std::string::npos) {
            comma = rest.size();
        }
        const std::string item = rest.substr(start, comma - start);
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw std::invalid_argument("dataset option '" + item + "' is not key=value");
            }
            if (!out.kv.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
                throw std::invalid_argument("duplicate dataset option '" + item.substr(0, eq) + "'");
            }
        }
        start = comma + 1;
    }
    return out;
}

template <typename T>
T number(const std::string& key, const std::string& text)
{
    T v{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) {
        throw std::invalid_argument("dataset option " + key + " has malformed value '" + text + "'");
    }
    return v;
}

std::string shortest(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

SyntheticSpec synthetic_spec(const ParsedId& id)
{
    SyntheticSpec s;
    if (id.kind == "blobs") {
        s.kind = SyntheticKind::Blobs;
    } else if (id.kind == "rings") {
        s.kind = SyntheticKind::Rings;
    } else if (id.kind == "bars") {
        s.kind = SyntheticKind::Bars;
    } else {
        throw std::invalid_argument("unknown dataset kind '" + id.kind + "'");
    }
    for (const auto& [k, v] : id.kv) {
        if (k == "n") {
            s.n = number<std::size_t>(k, v);
        } else if (k == "seed") {
            s.seed = number<std::uint64_t>(k, v);
        } else if (k == "classes") {
            s.classes = number<std::size_t>(k, v);
        } else if (k == "noise") {
            s.noise = number<double>(k, v);
        } else if (k == "size") {
            s.height = s.width = number<std::size_t>(k, v);
        } else if (k == "channels") {
            s.channels = number<std::size_t>(k, v);
        } else {
            throw std::invalid_argument("unknown dataset option '" + k + "' for " + id.kind);
        }
    }
    return s;
}

} // namespace

DataPair load_dataset(const std::string& id)
{
    const ParsedId parsed = parse_id(id);
    if (parsed.kind == "cifar10") {
        std::filesystem::path dir;
        double val = 0.1;
        std::uint64_t seed = 0;
        for (const auto& [k, v] : parsed.kv) {
            if (k == "dir") {
                dir = v;
            } else if (k == "val") {
                val = number<double>(k, v);
            } else if (k == "seed") {
                seed = number<std::uint64_t>(k, v);
            } else {
                throw std::invalid_argument("unknown dataset option '" + k + "' for cifar10");
            }
        }
        if (dir.empty()) {
            throw std::invalid_argument("cifar10 dataset id needs dir=<path>");
        }
        return load_cifar10(dir, val, seed);
    }
    return make_synthetic(synthetic_spec(parsed));
}

std::string canonical_dataset_id(const std::string& id)
{
    const ParsedId parsed = parse_id(id);
    if (parsed.kind == "cifar10") {
        std::string out = "cifar10:";
        bool first = true;
        std::map<std::string, std::string> kv = parsed.kv;
        kv.try_emplace("val", "0.1");
        kv.try_emplace("seed", "0");
        for (const auto& [k, v] : kv) {
            out += (first ? "" : ",") + k + "=" + v;
            first = false;
        }
        return out;
    }
    const SyntheticSpec s = synthetic_spec(parsed);
    return std::string(to_string(s.kind)) + ":channels=" + std::to_string(s.channels) +
           ",classes=" + std::to_string(s.classes) + ",n=" + std::to_string(s.n) + ",noise=" + shortest(s.noise) +
           ",seed=" + std::to_string(s.seed) + ",size=" + std::to_string(s.height);
}

} // namespace neurotree::io
