#include "wikimig/article_key.hpp"

#include "wikimig/error.hpp"

namespace wikimig {

std::string language_of_project(const std::string& project) {
    const auto dot = project.find('.');
    if (dot == std::string::npos) return {};
    const std::string rest = project.substr(dot + 1);
    if (rest != "wikipedia.org" && rest != "wikipedia") return {};
    return project.substr(0, dot);
}

std::string ArticleKey::language() const { return language_of_project(project); }

void ArticleKey::validate() const {
    const auto dot = project.find('.');
    if (dot == std::string::npos || project.substr(dot) != ".wikipedia.org") {
        raise(ErrorCode::Validation, "project '" + project + "' is not of the form <lang>.wikipedia.org");
    }
    const std::string lang = project.substr(0, dot);
    if (lang.empty()) {
        raise(ErrorCode::Validation, "empty language code in project '" + project + "'");
    }
    for (char c : lang) {
        if (!((c >= 'a' && c <= 'z') || c == '-')) {
            raise(ErrorCode::Validation, "language code '" + lang + "' is not lowercase ASCII");
        }
    }
    if (title.empty()) {
        raise(ErrorCode::Validation, "empty article title for project '" + project + "'");
    }
}

}  // namespace wikimig
