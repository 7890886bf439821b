#include "osdg/synth.hpp"

#include <array>
#include <cstdio>

#include "osdg/util.hpp"

namespace osdg {

namespace {

const std::array<std::vector<std::string>, 17> kTopics = {{
    {"extreme poverty", "poor households", "social protection", "cash transfers", "income support",
     "poverty line", "vulnerable families", "basic services", "microfinance", "social safety nets",
     "poverty reduction", "deprivation", "low-income households", "pension coverage", "land rights"},
    {"food security", "hunger", "malnutrition", "smallholder farmers", "crop yields", "agricultural productivity",
     "stunting", "food prices", "irrigation schemes", "nutrition programmes", "livestock", "seed varieties",
     "sustainable agriculture", "famine", "staple crops"},
    {"maternal mortality", "health services", "child mortality", "vaccination coverage", "primary health care",
     "tuberculosis", "malaria", "hospital admissions", "universal health coverage", "mental health",
     "health workers", "disease burden", "antenatal care", "essential medicines", "infectious diseases"},
    {"primary education", "school enrolment", "teachers", "learning outcomes", "literacy", "secondary schools",
     "early childhood education", "vocational training", "curriculum", "pupils", "tertiary education",
     "classroom", "scholarships", "school dropout", "numeracy"},
    {"gender equality", "women and girls", "gender-based violence", "female labour force participation",
     "child marriage", "women's empowerment", "gender gap", "domestic violence", "unpaid care work",
     "female genital mutilation", "women in leadership", "maternity leave", "discrimination against women",
     "gender parity", "reproductive rights"},
    {"drinking water", "sanitation", "wastewater treatment", "water scarcity", "hygiene", "water supply",
     "groundwater", "open defecation", "water quality", "freshwater", "latrines", "water utilities",
     "river basin management", "safe water", "handwashing"},
    {"renewable energy", "solar power", "electricity access", "energy efficiency", "wind turbines",
     "clean cooking", "power grid", "energy mix", "off-grid solar", "fossil fuel generation", "hydropower",
     "electrification", "energy consumption", "photovoltaic", "biomass fuel"},
    {"economic growth", "employment", "decent work", "labour market", "unemployment rate", "wages",
     "informal sector", "productivity growth", "youth unemployment", "job creation", "child labour",
     "small businesses", "labour rights", "gross domestic product", "workers"},
    {"infrastructure", "innovation", "manufacturing", "industrialization", "research and development",
     "broadband", "transport networks", "industrial policy", "technology adoption", "mobile networks",
     "value added", "small-scale industries", "patents", "internet access", "factories"},
    {"income inequality", "social inclusion", "migrants", "remittances", "marginalized groups",
     "gini coefficient", "discrimination", "wealth distribution", "persons with disabilities", "redistribution",
     "ethnic minorities", "inequality of opportunity", "migration", "bottom 40 percent", "excluded groups"},
    {"urban planning", "affordable housing", "public transport", "slums", "cities", "urbanization",
     "air pollution in cities", "green spaces", "municipal waste", "informal settlements", "urban resilience",
     "cultural heritage", "metropolitan areas", "housing costs", "urban sprawl"},
    {"sustainable consumption", "waste management", "recycling", "circular economy", "food waste",
     "material footprint", "sustainable production", "hazardous waste", "supply chains", "eco-labelling",
     "resource efficiency", "plastic packaging", "sustainability reporting", "product life cycle",
     "public procurement"},
    {"climate change", "greenhouse gas emissions", "carbon dioxide", "global warming", "climate adaptation",
     "climate mitigation", "carbon emissions", "extreme weather", "paris agreement", "climate resilience",
     "emission reductions", "climate finance", "temperature rise", "carbon neutrality", "climate policy"},
    {"marine ecosystems", "overfishing", "ocean acidification", "coral reefs", "fisheries", "marine pollution",
     "coastal ecosystems", "fish stocks", "marine protected areas", "mangroves", "plastic debris in oceans",
     "sea level", "aquaculture", "seabed", "small-scale fishers"},
    {"biodiversity", "deforestation", "forests", "land degradation", "desertification", "wildlife",
     "endangered species", "terrestrial ecosystems", "habitat loss", "invasive species", "poaching",
     "reforestation", "protected areas", "soil erosion", "ecosystem services"},
    {"rule of law", "corruption", "justice", "violence", "governance", "armed conflict", "human rights",
     "institutions", "homicide", "access to justice", "transparency", "birth registration", "bribery",
     "peacebuilding", "accountability"},
    {"development assistance", "global partnership", "trade agreements", "capacity building",
     "foreign direct investment", "debt sustainability", "technology transfer", "tax revenue",
     "multilateral cooperation", "official development assistance", "statistical capacity",
     "south-south cooperation", "public-private partnerships", "export diversification", "donor countries"},
}};

const std::vector<std::string> kActors = {
    "governments", "local authorities", "researchers", "development agencies", "civil society organisations",
    "the ministry", "policy makers", "regional programmes", "national agencies", "community groups"};
const std::vector<std::string> kPlaces = {
    "rural districts", "several countries", "the region", "low-income countries", "the capital",
    "coastal provinces", "sub-Saharan Africa", "South Asia", "Latin America", "small island states"};
const std::vector<std::string> kVerbs = {"address", "monitor", "prioritise", "evaluate", "expand", "measure",
                                         "invest in", "report on"};
const std::vector<std::string> kFillers = {
    "The report was published after two years of consultation.",
    "Data were collected through household surveys and interviews.",
    "The authors discuss limitations of the available evidence.",
    "Further research is needed to confirm these findings.",
    "The analysis covers the period from 2010 to 2020.",
    "Results differ considerably between countries.",
    "The findings were presented at a regional workshop.",
    "Several indicators are compared over time.",
    "This section summarises the main conclusions.",
    "The methodology follows earlier studies in the field."};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(uniform_index(rng, items.size()))];
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string topical_sentence(int topic, Rng& rng) {
  const auto& phrases = kTopics[static_cast<std::size_t>(topic - 1)];
  const std::string& a = pick(phrases, rng);
  const std::string& b = pick(phrases, rng);
  switch (uniform_index(rng, 5)) {
    case 0: return capitalize(pick(kActors, rng)) + " " + pick(kVerbs, rng) + " " + a + " across " + pick(kPlaces, rng) + ".";
    case 1: return "The study examines " + a + " and " + b + " in " + pick(kPlaces, rng) + ".";
    case 2: return "Progress on " + a + " remains uneven in " + pick(kPlaces, rng) + ".";
    case 3: return capitalize(a) + " is a priority for " + pick(kActors, rng) + ".";
    default: return "New evidence links " + a + " with " + b + ".";
  }
}

int other_topic(int topic, Rng& rng) {
  int other = static_cast<int>(uniform_index(rng, 16)) + 1;
  if (other >= topic) ++other;
  return other;
}

std::string snippet(int topic, const SynthOptions& o, Rng& rng) {
  const std::size_t sentences = 3 + static_cast<std::size_t>(uniform_index(rng, 4));
  const std::size_t filler_at = static_cast<std::size_t>(uniform_index(rng, sentences));
  std::string text;
  for (std::size_t i = 0; i < sentences; ++i) {
    if (!text.empty()) text += ' ';
    if (i == filler_at && sentences > 3) {
      text += pick(kFillers, rng);
    } else {
      const bool borrow = uniform_unit(rng) < o.cross_topic_rate;
      text += topical_sentence(borrow ? other_topic(std::min(topic, 16), rng) : topic, rng);
    }
  }
  return text;
}

std::string hex_id(std::uint64_t seed, std::size_t n) {
  return sha256_hex("synthetic:" + std::to_string(seed) + ":" + std::to_string(n)).substr(0, 32);
}

}  // namespace

const std::vector<std::string>& topic_phrases(SdgId sdg) { return kTopics[static_cast<std::size_t>(sdg.value() - 1)]; }

Corpus synthesize_corpus(const SynthOptions& o) {
  Rng rng(o.seed);
  std::vector<LabeledSnippet> rows;
  std::size_t n = 0;
  for (int sdg = 1; sdg <= 17; ++sdg) {
    const std::size_t count = sdg == 17 ? o.sdg17_rows : o.rows_per_sdg;
    for (std::size_t i = 0; i < count; ++i, ++n) {
      const bool on_topic = uniform_unit(rng) >= o.off_topic_rate;
      const int topic = on_topic ? sdg : other_topic(std::min(sdg, 16), rng);
      LabeledSnippet row;
      row.text_id = hex_id(o.seed, n);
      char doi[48];
      std::snprintf(doi, sizeof doi, "10.5555/synthetic.%05zu", n);
      row.source_ref = doi;
      row.text = snippet(topic, o, rng);
      row.sdg = SdgId(sdg);
      const long long votes = 3 + static_cast<long long>(uniform_index(rng, 7));
      for (long long v = 0; v < votes; ++v) {
        const bool agrees = uniform_unit(rng) >= o.vote_noise;
        (agrees == on_topic ? row.labels_positive : row.labels_negative) += 1;
      }
      row.agreement = compute_agreement(row.labels_positive, row.labels_negative);
      rows.push_back(std::move(row));
    }
  }
  return Corpus(std::move(rows));
}

}  // namespace osdg
