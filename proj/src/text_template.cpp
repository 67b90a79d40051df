#include <sstream>

#include "rapt/error.hpp"
#include "rapt/fileio.hpp"
#include "rapt/promptkit.hpp"

namespace rapt {

namespace {

std::string unescape(std::string_view v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '\\' || i + 1 == v.size()) {
      out += v[i];
      continue;
    }
    switch (v[++i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '\\': out += '\\'; break;
      default:
        out += '\\';
        out += v[i];
    }
  }
  return out;
}

std::string escape(std::string_view v) {
  std::string out;
  for (char c : v) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

const std::string& infix_text(const PromptSegment& seg, const TextTemplate& tmpl) {
  if (const auto* lit = std::get_if<Literal>(&seg.payload)) return lit->text;
  return tmpl.infix;
}

}  // namespace

TextTemplate parse_template(std::string_view text) {
  TextTemplate tmpl;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("<template>", lineno, "expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = unescape(std::string_view(line).substr(eq + 1));
    if (key == "global_prefix") {
      tmpl.global_prefix = value;
    } else if (key == "prefix") {
      tmpl.prefix = value;
    } else if (key == "infix") {
      tmpl.infix = value;
    } else if (key == "separator") {
      tmpl.separator = value;
    } else if (key.starts_with("class.")) {
      tmpl.class_tags[parse_novelty_class(key.substr(6))] = value;
    } else {
      throw ParseError("<template>", lineno, "unknown key '" + key + "'");
    }
  }
  if (tmpl.prefix.empty() || tmpl.infix.empty()) {
    throw DataError("template prefix and infix must be non-empty");
  }
  return tmpl;
}

TextTemplate load_template(const std::filesystem::path& path) {
  try {
    return parse_template(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.line(), e.what());
  }
}

std::string serialize_template(const TextTemplate& tmpl) {
  std::string out;
  out += "global_prefix=" + escape(tmpl.global_prefix) + "\n";
  out += "prefix=" + escape(tmpl.prefix) + "\n";
  out += "infix=" + escape(tmpl.infix) + "\n";
  out += "separator=" + escape(tmpl.separator) + "\n";
  for (const auto& [c, tag] : tmpl.class_tags) {
    out += "class." + std::string(to_string(c)) + "=" + escape(tag) + "\n";
  }
  return out;
}

std::string render_text(const PromptLayout& layout, const TextTemplate& tmpl) {
  std::string out;
  for (const auto& seg : layout.segments) {
    switch (seg.kind) {
      case SegmentKind::GlobalPrefix:
        out += tmpl.global_prefix;
        out += tmpl.separator;
        break;
      case SegmentKind::ClassPrefix:
        if (const auto* lit = std::get_if<Literal>(&seg.payload)) {
          out += lit->text;
        } else {
          out += tmpl.prefix;
        }
        break;
      case SegmentKind::ExampleInput:
      case SegmentKind::QueryInput:
        out += ' ';
        out += std::get<TokenSeq>(seg.payload).render();
        break;
      case SegmentKind::Infix:
        out += infix_text(seg, tmpl);
        if (seg.novelty) {
          auto it = tmpl.class_tags.find(*seg.novelty);
          if (it == tmpl.class_tags.end()) {
            throw LayoutError("template has no realization for novelty class '" +
                              std::string(to_string(*seg.novelty)) + "'");
          }
          out += it->second;
        }
        break;
      case SegmentKind::ExampleOutput:
        out += ' ';
        out += std::get<TokenSeq>(seg.payload).render();
        out += tmpl.separator;
        break;
    }
  }
  return out;
}

std::vector<RenderedSegment> parse_rendered(std::string_view text, const TextTemplate& tmpl) {
  std::vector<RenderedSegment> segs;
  const std::string global = tmpl.global_prefix + tmpl.separator;
  if (text.starts_with(global)) {
    segs.push_back({SegmentKind::GlobalPrefix, std::nullopt, {}});
    text.remove_prefix(global.size());
  }

  std::vector<std::string_view> blocks;
  while (true) {
    const auto sep = tmpl.separator.empty() ? std::string_view::npos : text.find(tmpl.separator);
    if (sep == std::string_view::npos) {
      blocks.push_back(text);
      break;
    }
    blocks.push_back(text.substr(0, sep));
    text.remove_prefix(sep + tmpl.separator.size());
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::string_view block = blocks[b];
    const bool query = b + 1 == blocks.size();
    if (!block.starts_with(tmpl.prefix)) throw LayoutError("block " + std::to_string(b) + " lacks the prefix");
    block.remove_prefix(tmpl.prefix.size());
    const auto ipos = block.find(tmpl.infix);
    if (ipos == std::string_view::npos) throw LayoutError("block " + std::to_string(b) + " lacks the infix");
    std::string_view input = block.substr(0, ipos);
    if (input.starts_with(' ')) input.remove_prefix(1);
    block.remove_prefix(ipos + tmpl.infix.size());

    std::optional<NoveltyClass> novelty;
    std::size_t tag_len = 0;
    for (const auto& [c, tag] : tmpl.class_tags) {
      if (!tag.empty() && tag.size() > tag_len && block.starts_with(tag)) {
        novelty = c;
        tag_len = tag.size();
      }
    }
    block.remove_prefix(tag_len);

    segs.push_back({SegmentKind::ClassPrefix, novelty, {}});
    segs.push_back({query ? SegmentKind::QueryInput : SegmentKind::ExampleInput, std::nullopt, std::string(input)});
    segs.push_back({SegmentKind::Infix, novelty, {}});
    if (query) {
      if (!block.empty()) throw LayoutError("text after the final infix");
    } else {
      if (block.starts_with(' ')) block.remove_prefix(1);
      segs.push_back({SegmentKind::ExampleOutput, std::nullopt, std::string(block)});
    }
  }
  return segs;
}

}  // namespace rapt
