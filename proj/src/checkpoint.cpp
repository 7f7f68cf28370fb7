#include "dclr/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace dclr {

void TrainConfig::validate() const {
    loss.validate();
    if (batch_size < 2) throw std::invalid_argument("config: batch_size must be >= 2");
    if (!(lr > 0.0)) throw std::invalid_argument("config: learning rate must be > 0");
    if (epochs == 0) throw std::invalid_argument("config: epochs must be >= 1");
    if (eval_interval == 0) throw std::invalid_argument("config: eval_interval must be >= 1");
    if (encoder.dropout < 0.0 || encoder.dropout >= 1.0)
        throw std::invalid_argument("config: dropout must be in [0, 1)");
}

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);  // round-trips IEEE-754 doubles
    return buf;
}

std::string fmt_u64(uint64_t x) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%" PRIu64, x);
    return buf;
}

std::map<std::string, std::string> header_map(const Checkpoint& c) {
    const TrainConfig& cfg = c.config;
    std::map<std::string, std::string> h;
    h["alpha"] = fmt_double(cfg.loss.alpha);
    h["batch_size"] = fmt_u64(cfg.batch_size);
    h["best_metric"] = fmt_double(c.best_metric);
    h["ce_views"] = cfg.ce_views ? "1" : "0";
    h["clip_norm"] = fmt_double(cfg.clip_norm);
    h["dropout"] = fmt_double(cfg.encoder.dropout);
    h["embed_dim"] = fmt_u64(cfg.encoder.embed_dim);
    h["epochs"] = fmt_u64(cfg.epochs);
    h["eval_interval"] = fmt_u64(cfg.eval_interval);
    h["hidden_dim"] = fmt_u64(cfg.encoder.hidden_dim);
    h["lambda"] = fmt_double(cfg.loss.lambda);
    h["lr"] = fmt_double(cfg.lr);
    h["max_len"] = fmt_u64(cfg.encoder.max_len);
    h["scl"] = cfg.scl_enabled ? "1" : "0";
    h["seed"] = fmt_u64(cfg.seed);
    h["step"] = fmt_u64(c.step);
    h["strategy"] = strategy_name(cfg.strategy);
    h["tau"] = fmt_double(cfg.loss.tau);
    h["total_steps"] = fmt_u64(cfg.total_steps);
    h["vocab_digest"] = fmt_u64(c.vocab_digest);
    h["vocab_size"] = fmt_u64(cfg.encoder.vocab_size);
    return h;
}

void apply_header(Checkpoint& c, const std::map<std::string, std::string>& h) {
    auto get = [&h](const std::string& key) -> const std::string& {
        auto it = h.find(key);
        if (it == h.end()) throw std::runtime_error("checkpoint header missing key '" + key + "'");
        return it->second;
    };
    auto as_u64 = [&get](const std::string& key) { return std::stoull(get(key)); };
    auto as_double = [&get](const std::string& key) { return std::stod(get(key)); };

    TrainConfig& cfg = c.config;
    cfg.loss.alpha = as_double("alpha");
    cfg.batch_size = as_u64("batch_size");
    c.best_metric = as_double("best_metric");
    cfg.ce_views = get("ce_views") == "1";
    cfg.clip_norm = as_double("clip_norm");
    cfg.encoder.dropout = as_double("dropout");
    cfg.encoder.embed_dim = as_u64("embed_dim");
    cfg.epochs = as_u64("epochs");
    cfg.eval_interval = as_u64("eval_interval");
    cfg.encoder.hidden_dim = as_u64("hidden_dim");
    cfg.loss.lambda = as_double("lambda");
    cfg.lr = as_double("lr");
    cfg.encoder.max_len = as_u64("max_len");
    cfg.scl_enabled = get("scl") == "1";
    cfg.seed = as_u64("seed");
    c.step = as_u64("step");
    cfg.strategy = parse_strategy(get("strategy"));
    cfg.loss.tau = as_double("tau");
    cfg.total_steps = as_u64("total_steps");
    c.vocab_digest = as_u64("vocab_digest");
    cfg.encoder.vocab_size = as_u64("vocab_size");
}

void put_u16(std::string& out, uint16_t x) {
    out.push_back(static_cast<char>(x & 0xff));
    out.push_back(static_cast<char>((x >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t x) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double x) {
    uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    put_u64(out, bits);
}

class Reader {
  public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    void expect(const char* magic, size_t len) {
        need(len);
        if (std::memcmp(bytes_.data() + pos_, magic, len) != 0)
            throw std::runtime_error("checkpoint: bad magic bytes");
        pos_ += len;
    }
    uint16_t u16() { return static_cast<uint16_t>(uint_n(2)); }
    uint32_t u32() { return static_cast<uint32_t>(uint_n(4)); }
    uint64_t u64() { return uint_n(8); }
    double f64() {
        uint64_t bits = u64();
        double x;
        std::memcpy(&x, &bits, sizeof(x));
        return x;
    }
    std::string str(size_t len) {
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }
    size_t pos() const { return pos_; }

  private:
    uint64_t uint_n(size_t n) {
        need(n);
        uint64_t x = 0;
        for (size_t i = 0; i < n; ++i)
            x |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += n;
        return x;
    }
    void need(size_t n) {
        if (pos_ + n > bytes_.size()) throw std::runtime_error("checkpoint: truncated file");
    }
    const std::string& bytes_;
    size_t pos_ = 0;
};

struct TensorRef {
    std::string name;
    const Tensor* tensor;
};

std::vector<TensorRef> tensor_list(const Checkpoint& c) {
    std::vector<TensorRef> out;
    c.params.visit([&out](const std::string& n, const Tensor& t) { out.push_back({"param." + n, &t}); });
    c.moments.m.visit([&out](const std::string& n, const Tensor& t) { out.push_back({"adam_m." + n, &t}); });
    c.moments.v.visit([&out](const std::string& n, const Tensor& t) { out.push_back({"adam_v." + n, &t}); });
    return out;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    std::string header;
    for (const auto& [k, v] : header_map(ckpt)) header += k + " = " + v + "\n";

    std::string out;
    out += "DCLR";
    put_u32(out, kCheckpointVersion);
    put_u64(out, header.size());
    out += header;

    auto tensors = tensor_list(ckpt);
    put_u32(out, static_cast<uint32_t>(tensors.size()));
    uint64_t offset = 0;
    for (const auto& ref : tensors) {
        put_u16(out, static_cast<uint16_t>(ref.name.size()));
        out += ref.name;
        out.push_back(0);  // dtype 0 = float64
        put_u32(out, static_cast<uint32_t>(ref.tensor->rows));
        put_u32(out, static_cast<uint32_t>(ref.tensor->cols));
        put_u64(out, offset);
        offset += ref.tensor->size() * sizeof(double);
    }
    for (const auto& ref : tensors)
        for (double x : ref.tensor->v) put_f64(out, x);
    return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
    Reader r(bytes);
    r.expect("DCLR", 4);
    uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint version mismatch: file has v" + std::to_string(version) +
                                 ", this build reads v" + std::to_string(kCheckpointVersion));
    uint64_t header_len = r.u64();
    std::string header = r.str(header_len);

    std::map<std::string, std::string> kv;
    size_t start = 0;
    while (start < header.size()) {
        size_t end = header.find('\n', start);
        if (end == std::string::npos) end = header.size();
        std::string line = header.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        size_t sep = line.find(" = ");
        if (sep == std::string::npos) throw std::runtime_error("checkpoint: malformed header line");
        kv[line.substr(0, sep)] = line.substr(sep + 3);
    }

    Checkpoint c;
    apply_header(c, kv);
    c.params = EncoderParams::zeros(c.config.encoder);
    c.moments = AdamMoments::zeros(c.config.encoder);

    struct DirEntry {
        std::string name;
        uint32_t rows, cols;
        uint64_t offset;
    };
    uint32_t count = r.u32();
    std::vector<DirEntry> dir(count);
    for (auto& e : dir) {
        uint16_t name_len = r.u16();
        e.name = r.str(name_len);
        uint8_t dtype = static_cast<uint8_t>(r.str(1)[0]);
        if (dtype != 0) throw std::runtime_error("checkpoint: unknown dtype for " + e.name);
        e.rows = r.u32();
        e.cols = r.u32();
        e.offset = r.u64();
    }

    auto expected = tensor_list(c);
    if (expected.size() != dir.size())
        throw std::runtime_error("checkpoint: tensor count mismatch");
    size_t payload_base = r.pos();
    for (size_t i = 0; i < dir.size(); ++i) {
        const auto& e = dir[i];
        if (e.name != expected[i].name)
            throw std::runtime_error("checkpoint: unexpected tensor '" + e.name + "'");
        auto* t = const_cast<Tensor*>(expected[i].tensor);
        if (e.rows != t->rows || e.cols != t->cols)
            throw std::runtime_error("checkpoint: shape mismatch for " + e.name);
        Reader pr(bytes);
        pr.str(payload_base + e.offset);  // seek
        for (auto& x : t->v) x = pr.f64();
    }
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    std::string bytes = serialize_checkpoint(ckpt);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("error writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_checkpoint(bytes);
}

}  // namespace dclr
