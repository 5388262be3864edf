#include "lela/loaders.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "lela/errors.hpp"
#include "lela/utf8.hpp"

namespace lela {
namespace {

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string extension_of(std::string_view path) {
  const std::filesystem::path p{std::string(path)};
  std::string ext = p.extension().string();
  if (ext.size() <= 1) return {};
  return lowercase_ascii(ext.substr(1));
}

void require_utf8(std::string_view bytes, std::string_view what) {
  if (!utf8::is_valid(bytes)) throw DecodeError(std::string(what) + " is not valid UTF-8");
}

std::string strip_bom(std::string_view bytes) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  return std::string(bytes);
}

const json* find_dotted(const json& root, std::string_view dotted) {
  const json* cur = &root;
  std::size_t pos = 0;
  while (pos <= dotted.size()) {
    std::size_t dot = dotted.find('.', pos);
    if (dot == std::string_view::npos) dot = dotted.size();
    const std::string key(dotted.substr(pos, dot - pos));
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(key);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    pos = dot + 1;
  }
  return cur;
}

std::string source_name(const RawInput& input) { return input.path.value_or("inline"); }

bool is_block_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 27> kBlock = {
      "p",     "div",   "br",      "li",    "ul",   "ol",     "h1",     "h2",      "h3",
      "h4",    "h5",    "h6",      "tr",    "table", "section", "article", "header", "footer",
      "nav",   "aside", "blockquote", "pre", "hr",   "title",  "main",   "dd",      "dt"};
  return std::find(kBlock.begin(), kBlock.end(), name) != kBlock.end();
}

const std::unordered_map<std::string, char32_t>& named_entities() {
  static const std::unordered_map<std::string, char32_t> kEntities = {
      {"amp", U'&'},     {"lt", U'<'},       {"gt", U'>'},      {"quot", U'"'},
      {"apos", U'\''},   {"nbsp", 0xA0},     {"mdash", 0x2014}, {"ndash", 0x2013},
      {"hellip", 0x2026}, {"copy", 0xA9},     {"reg", 0xAE},     {"trade", 0x2122},
      {"lsquo", 0x2018}, {"rsquo", 0x2019},  {"ldquo", 0x201C}, {"rdquo", 0x201D},
      {"laquo", 0xAB},   {"raquo", 0xBB},    {"eacute", 0xE9},  {"Eacute", 0xC9},
      {"egrave", 0xE8},  {"agrave", 0xE0},   {"ccedil", 0xE7},  {"uuml", 0xFC},
      {"ouml", 0xF6},    {"auml", 0xE4},     {"szlig", 0xDF},   {"euro", 0x20AC},
      {"middot", 0xB7},  {"deg", 0xB0},
  };
  return kEntities;
}

// Decodes the entity starting at html[i] == '&'. Returns bytes consumed, 0 if
// the text is not a recognized entity.
std::size_t decode_entity(std::string_view html, std::size_t i, std::string& out) {
  const std::size_t semi = html.find(';', i + 1);
  if (semi == std::string_view::npos || semi - i > 12) return 0;
  std::string_view body = html.substr(i + 1, semi - i - 1);
  if (body.empty()) return 0;
  char32_t cp = 0;
  if (body[0] == '#') {
    try {
      std::size_t used = 0;
      unsigned long v = 0;
      if (body.size() > 1 && (body[1] == 'x' || body[1] == 'X')) {
        v = std::stoul(std::string(body.substr(2)), &used, 16);
        if (used != body.size() - 2) return 0;
      } else {
        v = std::stoul(std::string(body.substr(1)), &used, 10);
        if (used != body.size() - 1) return 0;
      }
      if (v == 0 || v > 0x10FFFF || (v >= 0xD800 && v <= 0xDFFF)) return 0;
      cp = static_cast<char32_t>(v);
    } catch (const std::exception&) {
      return 0;
    }
  } else {
    auto it = named_entities().find(std::string(body));
    if (it == named_entities().end()) return 0;
    cp = it->second;
  }
  utf8::append(out, cp);
  return semi - i + 1;
}

void trim(std::string& s) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; };
  std::size_t b = 0;
  while (b < s.size() && is_ws(s[b])) ++b;
  std::size_t e = s.size();
  while (e > b && is_ws(s[e - 1])) --e;
  s = s.substr(b, e - b);
}

}  // namespace

Format detect_format(std::string_view path) {
  const std::string ext = extension_of(path);
  if (ext.empty()) throw NoExtension(std::string(path));
  if (ext == "txt" || ext == "text") return Format::text;
  if (ext == "md" || ext == "markdown") return Format::markdown;
  if (ext == "html" || ext == "htm") return Format::html;
  if (ext == "json") return Format::json;
  if (ext == "jsonl") return Format::jsonl;
  if (ext == "pdf" || ext == "docx") throw UnsupportedFormat(ext);
  throw UnsupportedFormat(ext);
}

bool has_known_extension(std::string_view path) {
  static constexpr std::array<std::string_view, 10> kKnown = {
      "txt", "text", "md", "markdown", "html", "htm", "json", "jsonl", "pdf", "docx"};
  const std::string ext = extension_of(path);
  return std::find(kKnown.begin(), kKnown.end(), ext) != kKnown.end();
}

std::string html_to_text(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  const auto block_break = [&out] {
    if (!out.empty() && out.back() != '\n') out.push_back('\n');
  };

  std::size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '<') {
      if (html.compare(i, 4, "<!--") == 0) {
        const std::size_t close = html.find("-->", i + 4);
        i = close == std::string_view::npos ? html.size() : close + 3;
        continue;
      }
      const std::size_t close = html.find('>', i + 1);
      if (close == std::string_view::npos) {
        out.append(html.substr(i));
        break;
      }
      std::string_view tag = html.substr(i + 1, close - i - 1);
      const bool closing = !tag.empty() && tag[0] == '/';
      if (closing) tag.remove_prefix(1);
      std::size_t name_end = 0;
      while (name_end < tag.size() && std::isalnum(static_cast<unsigned char>(tag[name_end]))) ++name_end;
      const std::string name = lowercase_ascii(tag.substr(0, name_end));
      i = close + 1;

      if (!closing && (name == "script" || name == "style")) {
        const std::string end_tag = "</" + name;
        std::size_t pos = i;
        while (pos < html.size()) {
          pos = html.find('<', pos);
          if (pos == std::string_view::npos) break;
          if (lowercase_ascii(html.substr(pos, end_tag.size())) == end_tag) break;
          ++pos;
        }
        if (pos == std::string_view::npos) {
          i = html.size();
        } else {
          const std::size_t gt = html.find('>', pos);
          i = gt == std::string_view::npos ? html.size() : gt + 1;
        }
        continue;
      }
      if (is_block_tag(name)) block_break();
      continue;
    }
    if (c == '&') {
      const std::size_t used = decode_entity(html, i, out);
      if (used > 0) {
        i += used;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  trim(out);
  return out;
}

std::vector<Document> load(const RawInput& input, const LoadOptions& options) {
  Format format = Format::text;
  if (input.declared_format) {
    format = *input.declared_format;
  } else if (input.path) {
    format = detect_format(*input.path);
  }
  const std::string source = source_name(input);
  const std::string bytes = strip_bom(input.bytes);

  std::vector<Document> docs;
  switch (format) {
    case Format::text:
    case Format::markdown: {
      require_utf8(bytes, source);
      docs.push_back(Document{source, bytes, source, format});
      break;
    }
    case Format::html: {
      require_utf8(bytes, source);
      std::string text = html_to_text(bytes);
      require_utf8(text, source);
      docs.push_back(Document{source, std::move(text), source, format});
      break;
    }
    case Format::json: {
      require_utf8(bytes, source);
      json obj;
      try {
        obj = json::parse(bytes);
      } catch (const json::parse_error& e) {
        throw DecodeError(source + ": " + e.what());
      }
      const json* text = find_dotted(obj, options.json_text_field);
      if (text == nullptr || !text->is_string()) throw MissingField(options.json_text_field, 0);
      std::string id = source;
      if (obj.is_object() && obj.contains("id") && obj["id"].is_string()) id = obj["id"].get<std::string>();
      docs.push_back(Document{std::move(id), text->get<std::string>(), source, format});
      break;
    }
    case Format::jsonl: {
      require_utf8(bytes, source);
      std::istringstream in(bytes);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
          obj = json::parse(line);
        } catch (const json::parse_error& e) {
          throw DecodeError(source + " line " + std::to_string(line_no) + ": " + e.what());
        }
        const json* text = find_dotted(obj, options.json_text_field);
        if (text == nullptr || !text->is_string()) throw MissingField(options.json_text_field, line_no);
        std::string id = source + "#" + std::to_string(line_no);
        if (obj.contains("id")) {
          const json& v = obj["id"];
          if (v.is_string()) id = v.get<std::string>();
          else if (v.is_number_integer()) id = std::to_string(v.get<long long>());
        }
        docs.push_back(Document{std::move(id), text->get<std::string>(), source, format});
      }
      break;
    }
  }
  return docs;
}

RawInput read_input_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return RawInput{ss.str(), std::nullopt, path};
}

}  // namespace lela
