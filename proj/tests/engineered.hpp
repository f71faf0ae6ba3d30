#pragma once

// A small synthetic world where every sense owns two content words and the
// word embeddings are one-hot, so the right answer is known by construction.

#include "test_support.hpp"
#include "vsd/disambig.hpp"
#include "vsd/imagerep.hpp"

#include <random>
#include <string>
#include <vector>

namespace vsd::test {

struct EngineeredWorld {
    SenseInventory inventory;
    EmbeddingTable embeddings{12};
    FeatureStore image_features{6};
    FeatureStore sense_features{6};
    SenseImageManifest manifest;
    std::vector<ImageRecord> records;

    Resources resources() const
    {
        Resources r;
        r.inventory = &inventory;
        r.embeddings = &embeddings;
        r.image_features = &image_features;
        r.manifest = &manifest;
        r.sense_features = &sense_features;
        return r;
    }
};

struct EngineeredSense {
    const char* id;
    const char* definition;
    const char* word_a;
    const char* word_b;
};

// play and ride are motion verbs, cut is not. Each verb has two depictable
// senses; sense k of the world owns embedding dims 2k and 2k+1 and visual
// dim k.
inline EngineeredWorld engineered_world(int images_per_sense = 4, std::uint64_t seed = 17)
{
    static const EngineeredSense senses[] = {
        {"play.01", "take part in a ball sport", "ball", "sport"},
        {"play.02", "perform guitar music", "guitar", "music"},
        {"ride.01", "sit on a horse animal", "horse", "animal"},
        {"ride.02", "travel on a bicycle wheel", "bicycle", "wheel"},
        {"cut.01", "slice with a knife food", "knife", "food"},
        {"cut.02", "trim with scissors paper", "scissors", "paper"},
    };
    EngineeredWorld w;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> jitter(0.0f, 0.2f);

    for (int v = 0; v < 3; ++v) {
        const std::string id = senses[2 * v].id;
        std::vector<SenseEntry> entries;
        for (int k = 0; k < 2; ++k)
            entries.push_back(sense(senses[2 * v + k].id, senses[2 * v + k].definition));
        w.inventory.add_verb(id.substr(0, id.find('.')), v == 2 ? VerbClass::NonMotion : VerbClass::Motion,
                             std::move(entries));
    }

    for (int k = 0; k < 6; ++k) {
        DenseVector a = DenseVector::Zero(12), b = DenseVector::Zero(12);
        a[2 * k] = 1;
        b[2 * k + 1] = 1;
        w.embeddings.add(senses[k].word_a, a);
        w.embeddings.add(senses[k].word_b, b);

        const std::string sense_key = std::string("sense_") + senses[k].id;
        std::vector<float> proto(6, 0.0f);
        proto[static_cast<std::size_t>(k)] = 1.0f;
        for (float& x : proto)
            x += jitter(rng);
        w.sense_features.insert(sense_key, proto);
        w.manifest[senses[k].id] = {sense_key};

        const std::string verb = std::string(senses[k].id).substr(0, std::string(senses[k].id).find('.'));
        for (int i = 0; i < images_per_sense; ++i) {
            ImageRecord r;
            r.image_id = std::string(senses[k].id) + "_" + std::to_string(i);
            r.verb = verb;
            r.gold_sense_id = senses[k].id;
            r.objects_gold = {senses[k].word_a};
            r.objects_pred = {{senses[k].word_a, 0.9}, {senses[(k + 1) % 6].word_a, 0.1}};
            r.descriptions_gold = {std::string("a person with a ") + senses[k].word_b + " and " + senses[k].word_a};
            r.descriptions_pred = {std::string("someone near the ") + senses[k].word_b};
            w.records.push_back(r);

            std::vector<float> feat(6, 0.0f);
            feat[static_cast<std::size_t>(k)] = 1.0f;
            for (float& x : feat)
                x += jitter(rng);
            w.image_features.insert(r.image_id, feat);
        }
    }
    return w;
}

}  // namespace vsd::test
