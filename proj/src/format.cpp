#include "ifim/format.hpp"

#include <algorithm>
#include <array>

#include "ifim/error.hpp"

namespace ifim::format {

namespace {

std::string_view base_letters(BaseMode mode) {
  switch (mode) {
    case BaseMode::PSM:
      return "PSM";
    case BaseMode::PMS:
      return "PMS";
    case BaseMode::SPM:
      return "SPM";
  }
  return "PSM";
}

// One element of a layout: either a literal sentinel or a free-text slot.
struct Piece {
  bool is_slot;
  Component component;
  std::string_view literal;
};

std::vector<Piece> pieces(const Mode& mode, const SentinelSet& s) {
  const BaseMode base = base_of(mode);
  std::vector<Piece> out;
  for (Component c : components(mode)) {
    switch (c) {
      case Component::P:
        out.push_back({false, c, s.pre});
        out.push_back({true, c, {}});
        break;
      case Component::S:
        // PMS closes the suffix with its sentinel instead of opening it.
        if (base == BaseMode::PMS) {
          out.push_back({true, c, {}});
          out.push_back({false, c, s.suf});
        } else {
          out.push_back({false, c, s.suf});
          out.push_back({true, c, {}});
        }
        break;
      case Component::M:
        out.push_back({false, c, s.mid});
        break;
      case Component::I:
        out.push_back({false, c, s.ins});
        out.push_back({true, c, {}});
        break;
    }
  }
  return out;
}

struct Texts {
  std::string_view prefix;
  std::string_view suffix;
  std::string_view instruction;
};

Rendered render(const Mode& mode, const SentinelSet& sentinels, const Texts& t,
                std::string target) {
  Rendered r;
  r.target = std::move(target);
  bool after_middle = false;
  for (const auto& p : pieces(mode, sentinels)) {
    std::string& out = after_middle ? r.input_after : r.input;
    if (!p.is_slot) {
      out.append(p.literal);
      if (p.component == Component::M) after_middle = true;
      continue;
    }
    switch (p.component) {
      case Component::P:
        out.append(t.prefix);
        break;
      case Component::S:
        out.append(t.suffix);
        break;
      case Component::I:
        out.append(t.instruction);
        break;
      case Component::M:
        break;
    }
  }
  return r;
}

}  // namespace

std::string IfimMode::name() const { return mode_name(*this); }

std::string_view to_string(BaseMode mode) { return base_letters(mode); }

BaseMode base_of(const Mode& mode) {
  if (const auto* b = std::get_if<BaseMode>(&mode)) return *b;
  return std::get<IfimMode>(mode).base;
}

std::vector<Component> components(const Mode& mode) {
  std::vector<Component> out;
  for (char c : base_letters(base_of(mode))) out.push_back(static_cast<Component>(c));
  if (const auto* m = std::get_if<IfimMode>(&mode)) {
    if (m->ins_position < 0 || m->ins_position > 3)
      throw InvalidInput("IFIM instruction position must be in 0..3");
    out.insert(out.begin() + m->ins_position, Component::I);
  }
  return out;
}

std::string mode_name(const Mode& mode) {
  std::string out;
  for (Component c : components(mode)) out.push_back(static_cast<char>(c));
  return out;
}

BaseMode parse_base_mode(std::string_view name) {
  for (BaseMode b : {BaseMode::PSM, BaseMode::PMS, BaseMode::SPM})
    if (base_letters(b) == name) return b;
  throw InvalidInput("unknown FIM mode '" + std::string(name) + "'");
}

IfimMode parse_ifim_mode(std::string_view name) {
  const auto i = name.find('I');
  if (name.size() == 4 && i != std::string_view::npos && name.find('I', i + 1) == std::string_view::npos) {
    std::string rest(name);
    rest.erase(i, 1);
    for (BaseMode b : {BaseMode::PSM, BaseMode::PMS, BaseMode::SPM})
      if (base_letters(b) == rest) return IfimMode{b, static_cast<int>(i)};
  }
  throw InvalidInput("unknown IFIM mode '" + std::string(name) + "'");
}

Mode parse_mode(std::string_view name) {
  if (name.size() == 3) return parse_base_mode(name);
  if (name.size() == 4) return parse_ifim_mode(name);
  throw InvalidInput("unknown mode '" + std::string(name) + "'");
}

void SentinelSet::validate() const {
  const std::array<const std::string*, 4> all = {&pre, &suf, &mid, &ins};
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]->empty()) throw InvalidInput("sentinel strings must be non-empty");
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i == j) continue;
      if (all[j]->find(*all[i]) != std::string::npos)
        throw InvalidInput("sentinel '" + *all[i] + "' overlaps sentinel '" + *all[j] + "'");
    }
  }
}

std::vector<IfimMode> enumerate_ifim_modes(BaseMode base) {
  return {{base, 0}, {base, 1}, {base, 2}, {base, 3}};
}

IfimMode default_ifim_mode(BaseMode base) {
  const auto letters = base_letters(base);
  return {base, static_cast<int>(letters.find('M'))};
}

Rendered render_fim(const corpus::FimTriplet& triplet, BaseMode mode,
                    const SentinelSet& sentinels) {
  return render(mode, sentinels, {triplet.prefix, triplet.suffix, {}}, triplet.middle);
}

Rendered render_ifim(const corpus::InstructionRecord& record, const IfimMode& mode,
                     const SentinelSet& sentinels) {
  if (record.instruction.empty())
    throw InvalidInput("render_ifim: empty instruction (use render_fim)");
  const auto& t = record.triplet;
  return render(mode, sentinels, {t.prefix, t.suffix, record.instruction}, t.middle);
}

LayoutParts parse_layout(std::string_view layout, const Mode& mode,
                         const SentinelSet& sentinels) {
  const auto ps = pieces(mode, sentinels);
  const std::array<std::string_view, 4> literals = {sentinels.pre, sentinels.suf, sentinels.mid,
                                                    sentinels.ins};
  auto contains_sentinel = [&](std::string_view text) {
    return std::any_of(literals.begin(), literals.end(), [&](std::string_view lit) {
      return text.find(lit) != std::string_view::npos;
    });
  };

  LayoutParts parts;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const Piece& p = ps[k];
    if (!p.is_slot) {
      if (layout.substr(pos, p.literal.size()) != p.literal)
        throw InvalidInput("layout does not match mode " + mode_name(mode));
      pos += p.literal.size();
      continue;
    }
    std::size_t end = layout.size();
    if (k + 1 < ps.size()) {
      if (ps[k + 1].is_slot)
        throw InvalidInput("mode " + mode_name(mode) + " is not uniquely parseable");
      end = layout.find(ps[k + 1].literal, pos);
      if (end == std::string_view::npos)
        throw InvalidInput("layout does not match mode " + mode_name(mode));
    }
    const auto text = layout.substr(pos, end - pos);
    if (contains_sentinel(text))
      throw InvalidInput("component text contains a sentinel");
    switch (p.component) {
      case Component::P:
        parts.prefix = std::string(text);
        break;
      case Component::S:
        parts.suffix = std::string(text);
        break;
      case Component::I:
        parts.instruction = std::string(text);
        break;
      case Component::M:
        break;
    }
    pos = end;
  }
  if (pos != layout.size()) throw InvalidInput("trailing text after layout");
  return parts;
}

std::string select_ins_token(const std::vector<VocabEntry>& vocab, const SentinelSet& reserved) {
  if (vocab.empty()) throw InvalidInput("select_ins_token: empty vocabulary");
  auto collides = [&](const std::string& tok) {
    if (tok.empty()) return true;
    for (const std::string* s : {&reserved.pre, &reserved.suf, &reserved.mid}) {
      if (s->empty()) continue;
      if (tok.find(*s) != std::string::npos || s->find(tok) != std::string::npos) return true;
    }
    return false;
  };
  const VocabEntry* best = nullptr;
  for (const auto& e : vocab) {
    if (collides(e.token)) continue;
    if (best == nullptr || e.frequency < best->frequency) best = &e;
  }
  if (best == nullptr)
    throw InvalidInput("select_ins_token: every candidate collides with an existing sentinel");
  return best->token;
}

std::vector<Component> cache_survival(const IfimMode& mode) {
  std::vector<Component> out;
  for (Component c : components(mode)) {
    if (c == Component::I) break;
    if (c == Component::P || c == Component::S) out.push_back(c);
  }
  return out;
}

TrainingExample build_training_example(const corpus::InstructionRecord& record,
                                       const Mode& mode, const SentinelSet& sentinels,
                                       corpus::Tag tag) {
  TrainingExample ex;
  ex.record_id = record.triplet.sample_id;
  ex.tag = tag;
  Rendered r;
  switch (tag) {
    case corpus::Tag::ifim: {
      const auto* m = std::get_if<IfimMode>(&mode);
      const IfimMode im = m != nullptr ? *m : default_ifim_mode(base_of(mode));
      r = render_ifim(record, im, sentinels);
      ex.mode = im.name();
      break;
    }
    case corpus::Tag::plain_fim:
      r = render_fim(record.triplet, base_of(mode), sentinels);
      ex.mode = std::string(to_string(base_of(mode)));
      break;
    case corpus::Tag::cfim:
      throw InvalidInput("cfim examples are built from a to_cfim triplet");
  }
  ex.input = std::move(r.input);
  ex.input_after = std::move(r.input_after);
  ex.target = std::move(r.target);
  return ex;
}

TrainingExample build_training_example(const corpus::FimTriplet& triplet, const Mode& mode,
                                       const SentinelSet& sentinels, corpus::Tag tag) {
  if (tag == corpus::Tag::ifim)
    throw InvalidInput("ifim examples need an instruction record");
  TrainingExample ex;
  ex.record_id = triplet.sample_id;
  ex.tag = tag;
  ex.mode = std::string(to_string(base_of(mode)));
  auto r = render_fim(triplet, base_of(mode), sentinels);
  ex.input = std::move(r.input);
  ex.input_after = std::move(r.input_after);
  ex.target = std::move(r.target);
  return ex;
}

nlohmann::json to_json(const TrainingExample& example) {
  nlohmann::json j;
  j["id"] = example.record_id;
  j["mode"] = example.mode;
  j["tag"] = std::string(corpus::to_string(example.tag));
  j["input"] = example.input;
  if (!example.input_after.empty()) j["input_after"] = example.input_after;
  j["target"] = example.target;
  return j;
}

}  // namespace ifim::format
