#include "lela/registry.hpp"

#include <spdlog/spdlog.h>

#include "lela/errors.hpp"

namespace lela {

namespace {

Slot slot_of_factory(const AnyFactory& f) {
  static constexpr Slot kByIndex[] = {Slot::loader,   Slot::ner,           Slot::candidate_generator,
                                      Slot::reranker, Slot::disambiguator, Slot::knowledge_base};
  return kByIndex[f.index()];
}

}  // namespace

Registry::Registry(const Registry& other) {
  std::lock_guard lock(other.mutex_);
  factories_ = other.factories_;
}

Registry& Registry::operator=(const Registry& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  factories_ = other.factories_;
  return *this;
}

void Registry::register_component(Slot slot, const std::string& name, AnyFactory factory) {
  if (name.empty()) throw InvalidParams("component name must be non-empty");
  if (slot_of_factory(factory) != slot) {
    throw InvalidParams("factory for '" + name + "' does not build a " + std::string(to_string(slot)) + " component");
  }
  std::lock_guard lock(mutex_);
  auto& slot_map = factories_[slot];
  if (slot_map.contains(name)) spdlog::info("replacing registered {} component '{}'", to_string(slot), name);
  slot_map.insert_or_assign(name, std::move(factory));
}

bool Registry::contains(Slot slot, const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = factories_.find(slot);
  return it != factories_.end() && it->second.contains(name);
}

std::vector<std::string> Registry::names(Slot slot) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  if (auto it = factories_.find(slot); it != factories_.end()) {
    for (const auto& [name, f] : it->second) out.push_back(name);
  }
  return out;
}

AnyFactory Registry::lookup(Slot slot, const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = factories_.find(slot);
  if (it == factories_.end()) throw UnknownComponent(std::string(to_string(slot)), name);
  auto f = it->second.find(name);
  if (f == it->second.end()) throw UnknownComponent(std::string(to_string(slot)), name);
  return f->second;
}

Registry& default_registry() {
  static Registry registry = [] {
    Registry r;
    register_builtins(r);
    return r;
  }();
  return registry;
}

}  // namespace lela
