#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "stress/models.hpp"

namespace stress {

namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

  template <typename T>
  void uint(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, sizeof(T));
  }

  void u32(std::size_t v) {
    if (v > 0xFFFFFFFFu) throw InputError("value too large for checkpoint field");
    uint<std::uint32_t>(static_cast<std::uint32_t>(v));
  }
  void f64(double v) { uint<std::uint64_t>(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw InputError("checkpoint is truncated");
  }

  template <typename T>
  T uint() {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }

  std::size_t u32() { return uint<std::uint32_t>(); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const TrainedModel& model, std::ostream& out) {
  Writer w(out);
  const ModelConfig& c = model.config;
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.uint<std::uint8_t>(kCheckpointVersion);

  w.u32(c.vocab_size);
  w.u32(c.embedding_dim);
  w.u32(c.hidden_units);
  w.u32(c.max_len);
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(c.head));
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(c.optimizer));
  w.f64(c.learning_rate);
  w.u32(c.batch_size);
  w.u32(c.epochs);
  w.uint<std::uint64_t>(c.seed);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.adam_epsilon);
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(c.lr_schedule));

  w.u32(model.vocab.chars().size());
  for (char32_t ch : model.vocab.chars()) w.uint<std::uint32_t>(static_cast<std::uint32_t>(ch));

  const auto tensors = model.params.tensors();
  w.u32(tensors.size());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto name = ModelParams::kTensorNames[i];
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u32(tensors[i]->rows);
    w.u32(tensors[i]->cols);
    for (double v : tensors[i]->values) w.f64(v);
  }
  if (!out) throw InputError("failed to write checkpoint");
}

TrainedModel load_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw InputError("not a checkpoint file");
  const auto version = r.uint<std::uint8_t>();
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version));
  }

  TrainedModel m;
  ModelConfig& c = m.config;
  c.vocab_size = r.u32();
  c.embedding_dim = r.u32();
  c.hidden_units = r.u32();
  c.max_len = r.u32();
  const auto head = r.uint<std::uint8_t>();
  const auto opt = r.uint<std::uint8_t>();
  if (head > 1 || opt > 1) throw InputError("corrupt checkpoint header");
  c.head = static_cast<Head>(head);
  c.optimizer = static_cast<OptimizerKind>(opt);
  c.learning_rate = r.f64();
  c.batch_size = r.u32();
  c.epochs = r.u32();
  c.seed = r.uint<std::uint64_t>();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.adam_epsilon = r.f64();
  const auto schedule = r.uint<std::uint8_t>();
  if (schedule > 1) throw InputError("corrupt checkpoint header");
  c.lr_schedule = static_cast<LrSchedule>(schedule);
  c.validate();

  const std::size_t nchars = r.u32();
  if (nchars + CharVocab::kReserved != c.vocab_size) throw InputError("checkpoint vocabulary size mismatch");
  std::vector<char32_t> chars(nchars);
  for (auto& ch : chars) ch = static_cast<char32_t>(r.uint<std::uint32_t>());
  m.vocab = CharVocab(std::move(chars));

  m.params = ModelParams::zeros(c);
  auto tensors = m.params.tensors();
  if (r.u32() != tensors.size()) throw InputError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    std::string name(r.uint<std::uint16_t>(), '\0');
    r.bytes(name.data(), name.size());
    if (name != ModelParams::kTensorNames[i]) throw InputError("unexpected checkpoint tensor '" + name + "'");
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    if (rows != tensors[i]->rows || cols != tensors[i]->cols) {
      throw InputError("checkpoint tensor '" + name + "' has the wrong shape");
    }
    for (double& v : tensors[i]->values) v = r.f64();
  }
  if (in.peek() != std::char_traits<char>::eof()) throw InputError("trailing bytes after checkpoint");
  return m;
}

void save(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  save_checkpoint(model, out);
}

TrainedModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace stress
