#pragma once

// Data files compiled into the binary so the scanner and its mock fixtures
// are self-contained. Sources live under data/ in the repository.
namespace mcpscan::embedded {

extern const char* const kDefaultCatalogJson;
extern const char* const kReportSchemaJson;
extern const char* const kKnowledgeBaseJson;
extern const char* const kHackerSystemPrompt;
extern const char* const kAuditorSystemPrompt;
extern const char* const kProfileFilesystemJson;
extern const char* const kProfileSlackJson;
extern const char* const kProfileEverythingJson;
extern const char* const kProfileChromaJson;

}  // namespace mcpscan::embedded
