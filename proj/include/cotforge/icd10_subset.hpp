#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "cotforge/icd10.hpp"

namespace cotforge {

struct IcdSubsetEntry {
    const char* code;
    const char* name;
    Department department;
};

// Small built-in code subset used for fixtures and demos. Real deployments
// load a full taxonomy from a JSON file; the department mapping here is a
// repo convention.
inline const std::vector<IcdSubsetEntry>& icd10_subset() {
    static const std::vector<IcdSubsetEntry> table = {
        // Respiratory (J chapter)
        {"J00", "Acute nasopharyngitis", Department::Respiratory},
        {"J01.0", "Acute maxillary sinusitis", Department::Respiratory},
        {"J02.9", "Acute pharyngitis, unspecified", Department::Respiratory},
        {"J03.9", "Acute tonsillitis, unspecified", Department::Respiratory},
        {"J04.0", "Acute laryngitis", Department::Respiratory},
        {"J06.9", "Acute upper respiratory infection, unspecified", Department::Respiratory},
        {"J10.1", "Influenza with other respiratory manifestations", Department::Respiratory},
        {"J12.9", "Viral pneumonia, unspecified", Department::Respiratory},
        {"J13", "Pneumonia due to Streptococcus pneumoniae", Department::Respiratory},
        {"J14", "Pneumonia due to Haemophilus influenzae", Department::Respiratory},
        {"J15.9", "Bacterial pneumonia, unspecified", Department::Respiratory},
        {"J18.9", "Pneumonia, unspecified organism", Department::Respiratory},
        {"J20.9", "Acute bronchitis, unspecified", Department::Respiratory},
        {"J21.9", "Acute bronchiolitis, unspecified", Department::Respiratory},
        {"J22", "Acute lower respiratory infection, unspecified", Department::Respiratory},
        {"J30.1", "Allergic rhinitis due to pollen", Department::Respiratory},
        {"J31.0", "Chronic rhinitis", Department::Respiratory},
        {"J32.9", "Chronic sinusitis, unspecified", Department::Respiratory},
        {"J35.1", "Hypertrophy of tonsils", Department::Respiratory},
        {"J40", "Bronchitis, not specified as acute or chronic", Department::Respiratory},
        {"J42", "Unspecified chronic bronchitis", Department::Respiratory},
        {"J44.0", "COPD with acute lower respiratory infection", Department::Respiratory},
        {"J44.1", "COPD with acute exacerbation", Department::Respiratory},
        {"J44.9", "Chronic obstructive pulmonary disease, unspecified", Department::Respiratory},
        {"J45.0", "Predominantly allergic asthma", Department::Respiratory},
        {"J45.1", "Nonallergic asthma", Department::Respiratory},
        {"J45.9", "Asthma, unspecified", Department::Respiratory},
        {"J47", "Bronchiectasis", Department::Respiratory},
        {"J81", "Pulmonary edema", Department::Respiratory},
        {"J90", "Pleural effusion", Department::Respiratory},
        {"J93.9", "Pneumothorax, unspecified", Department::Respiratory},
        {"J96.0", "Acute respiratory failure", Department::Respiratory},
        // Gastroenterology (K chapter)
        {"K20", "Esophagitis", Department::Gastroenterology},
        {"K21.0", "Gastro-esophageal reflux disease with esophagitis", Department::Gastroenterology},
        {"K21.9", "Gastro-esophageal reflux disease without esophagitis", Department::Gastroenterology},
        {"K25.0", "Acute gastric ulcer with hemorrhage", Department::Gastroenterology},
        {"K25.9", "Gastric ulcer, unspecified", Department::Gastroenterology},
        {"K26.9", "Duodenal ulcer, unspecified", Department::Gastroenterology},
        {"K27.9", "Peptic ulcer, unspecified", Department::Gastroenterology},
        {"K29.0", "Acute hemorrhagic gastritis", Department::Gastroenterology},
        {"K29.5", "Chronic gastritis, unspecified", Department::Gastroenterology},
        {"K29.7", "Gastritis, unspecified", Department::Gastroenterology},
        {"K30", "Functional dyspepsia", Department::Gastroenterology},
        {"K31.9", "Disease of stomach and duodenum, unspecified", Department::Gastroenterology},
        {"K35.2", "Acute appendicitis with generalized peritonitis", Department::Gastroenterology},
        {"K35.8", "Acute appendicitis, other and unspecified", Department::Gastroenterology},
        {"K40.9", "Unilateral inguinal hernia", Department::Gastroenterology},
        {"K42.9", "Umbilical hernia without obstruction", Department::Gastroenterology},
        {"K50.0", "Crohn disease of small intestine", Department::Gastroenterology},
        {"K50.9", "Crohn disease, unspecified", Department::Gastroenterology},
        {"K51.9", "Ulcerative colitis, unspecified", Department::Gastroenterology},
        {"K52.9", "Noninfective gastroenteritis and colitis", Department::Gastroenterology},
        {"K56.6", "Intestinal obstruction, unspecified", Department::Gastroenterology},
        {"K57.3", "Diverticular disease of large intestine", Department::Gastroenterology},
        {"K58.9", "Irritable bowel syndrome without diarrhea", Department::Gastroenterology},
        {"K59.0", "Constipation", Department::Gastroenterology},
        {"K63.5", "Polyp of colon", Department::Gastroenterology},
        {"K70.3", "Alcoholic cirrhosis of liver", Department::Gastroenterology},
        {"K72.0", "Acute hepatic failure", Department::Gastroenterology},
        {"K74.6", "Cirrhosis of liver, other and unspecified", Department::Gastroenterology},
        {"K76.0", "Fatty liver, not elsewhere classified", Department::Gastroenterology},
        {"K80.2", "Calculus of gallbladder without cholecystitis", Department::Gastroenterology},
        {"K81.0", "Acute cholecystitis", Department::Gastroenterology},
        {"K85.9", "Acute pancreatitis, unspecified", Department::Gastroenterology},
        {"K92.2", "Gastrointestinal hemorrhage, unspecified", Department::Gastroenterology},
        // Urology (N chapter)
        {"N00.9", "Acute nephritic syndrome, unspecified", Department::Urology},
        {"N03.9", "Chronic nephritic syndrome, unspecified", Department::Urology},
        {"N04.9", "Nephrotic syndrome, unspecified", Department::Urology},
        {"N10", "Acute pyelonephritis", Department::Urology},
        {"N11.9", "Chronic tubulo-interstitial nephritis", Department::Urology},
        {"N12", "Tubulo-interstitial nephritis, not acute or chronic", Department::Urology},
        {"N13.3", "Other and unspecified hydronephrosis", Department::Urology},
        {"N17.9", "Acute kidney failure, unspecified", Department::Urology},
        {"N18.3", "Chronic kidney disease, stage 3", Department::Urology},
        {"N18.5", "Chronic kidney disease, stage 5", Department::Urology},
        {"N18.9", "Chronic kidney disease, unspecified", Department::Urology},
        {"N20.0", "Calculus of kidney", Department::Urology},
        {"N20.1", "Calculus of ureter", Department::Urology},
        {"N21.0", "Calculus in bladder", Department::Urology},
        {"N23", "Unspecified renal colic", Department::Urology},
        {"N28.9", "Disorder of kidney and ureter, unspecified", Department::Urology},
        {"N30.0", "Acute cystitis", Department::Urology},
        {"N30.9", "Cystitis, unspecified", Department::Urology},
        {"N31.9", "Neuromuscular dysfunction of bladder", Department::Urology},
        {"N32.0", "Bladder-neck obstruction", Department::Urology},
        {"N34.1", "Nonspecific urethritis", Department::Urology},
        {"N35.9", "Urethral stricture, unspecified", Department::Urology},
        {"N39.0", "Urinary tract infection, site not specified", Department::Urology},
        {"N40", "Benign prostatic hyperplasia", Department::Urology},
        {"N41.0", "Acute prostatitis", Department::Urology},
        {"N42.9", "Disorder of prostate, unspecified", Department::Urology},
        {"N43.3", "Hydrocele, unspecified", Department::Urology},
        {"N45.9", "Orchitis, epididymitis without abscess", Department::Urology},
        {"N47", "Redundant prepuce and phimosis", Department::Urology},
        {"N48.4", "Impotence of organic origin", Department::Urology},
        // Cardiology (I chapter)
        {"I10", "Essential hypertension", Department::Cardiology},
        {"I11.9", "Hypertensive heart disease without heart failure", Department::Cardiology},
        {"I15.9", "Secondary hypertension, unspecified", Department::Cardiology},
        {"I20.0", "Unstable angina", Department::Cardiology},
        {"I20.9", "Angina pectoris, unspecified", Department::Cardiology},
        {"I21.0", "Acute transmural myocardial infarction of anterior wall", Department::Cardiology},
        {"I21.4", "Acute subendocardial myocardial infarction", Department::Cardiology},
        {"I21.9", "Acute myocardial infarction, unspecified", Department::Cardiology},
        {"I25.1", "Atherosclerotic heart disease", Department::Cardiology},
        {"I25.9", "Chronic ischemic heart disease, unspecified", Department::Cardiology},
        {"I26.9", "Pulmonary embolism without acute cor pulmonale", Department::Cardiology},
        {"I27.0", "Primary pulmonary hypertension", Department::Cardiology},
        {"I31.9", "Disease of pericardium, unspecified", Department::Cardiology},
        {"I33.0", "Acute and subacute infective endocarditis", Department::Cardiology},
        {"I34.0", "Mitral valve insufficiency", Department::Cardiology},
        {"I35.0", "Aortic valve stenosis", Department::Cardiology},
        {"I38", "Endocarditis, valve unspecified", Department::Cardiology},
        {"I42.0", "Dilated cardiomyopathy", Department::Cardiology},
        {"I44.2", "Atrioventricular block, complete", Department::Cardiology},
        {"I47.1", "Supraventricular tachycardia", Department::Cardiology},
        {"I48.0", "Paroxysmal atrial fibrillation", Department::Cardiology},
        {"I48.9", "Atrial fibrillation and flutter, unspecified", Department::Cardiology},
        {"I49.9", "Cardiac arrhythmia, unspecified", Department::Cardiology},
        {"I50.0", "Congestive heart failure", Department::Cardiology},
        {"I50.1", "Left ventricular failure", Department::Cardiology},
        {"I50.9", "Heart failure, unspecified", Department::Cardiology},
        {"I63.9", "Cerebral infarction, unspecified", Department::Cardiology},
        {"I67.9", "Cerebrovascular disease, unspecified", Department::Cardiology},
        {"I70.2", "Atherosclerosis of arteries of extremities", Department::Cardiology},
        {"I71.4", "Abdominal aortic aneurysm without rupture", Department::Cardiology},
        // Immunology (immunodeficiencies and systemic autoimmune disease)
        {"D80.0", "Hereditary hypogammaglobulinemia", Department::Immunology},
        {"D80.1", "Nonfamilial hypogammaglobulinemia", Department::Immunology},
        {"D81.9", "Combined immunodeficiency, unspecified", Department::Immunology},
        {"D82.0", "Wiskott-Aldrich syndrome", Department::Immunology},
        {"D83.9", "Common variable immunodeficiency, unspecified", Department::Immunology},
        {"D84.1", "Defects in the complement system", Department::Immunology},
        {"D84.9", "Immunodeficiency, unspecified", Department::Immunology},
        {"D86.0", "Sarcoidosis of lung", Department::Immunology},
        {"D89.1", "Cryoglobulinemia", Department::Immunology},
        {"D89.9", "Disorder involving the immune mechanism, unspecified", Department::Immunology},
        {"D69.0", "Allergic purpura", Department::Immunology},
        {"D69.3", "Immune thrombocytopenic purpura", Department::Immunology},
        {"M05.9", "Seropositive rheumatoid arthritis, unspecified", Department::Immunology},
        {"M06.9", "Rheumatoid arthritis, unspecified", Department::Immunology},
        {"M08.0", "Juvenile rheumatoid arthritis", Department::Immunology},
        {"M30.0", "Polyarteritis nodosa", Department::Immunology},
        {"M31.3", "Granulomatosis with polyangiitis", Department::Immunology},
        {"M32.1", "Systemic lupus erythematosus with organ involvement", Department::Immunology},
        {"M32.9", "Systemic lupus erythematosus, unspecified", Department::Immunology},
        {"M33.2", "Polymyositis", Department::Immunology},
        {"M34.9", "Systemic sclerosis, unspecified", Department::Immunology},
        {"M35.0", "Sicca syndrome", Department::Immunology},
        {"M35.2", "Behcet disease", Department::Immunology},
        {"M35.9", "Systemic involvement of connective tissue, unspecified", Department::Immunology},
        {"M45", "Ankylosing spondylitis", Department::Immunology},
        {"L50.9", "Urticaria, unspecified", Department::Immunology},
        {"L93.0", "Discoid lupus erythematosus", Department::Immunology},
        {"T78.4", "Allergy, unspecified", Department::Immunology},
        {"M02.3", "Reiter disease", Department::Immunology},
        {"M10.9", "Gout, unspecified", Department::Immunology},
        // Neurology (G chapter)
        {"G00.9", "Bacterial meningitis, unspecified", Department::Neurology},
        {"G03.9", "Meningitis, unspecified", Department::Neurology},
        {"G04.9", "Encephalitis, myelitis and encephalomyelitis", Department::Neurology},
        {"G20", "Parkinson disease", Department::Neurology},
        {"G21.9", "Secondary parkinsonism, unspecified", Department::Neurology},
        {"G24.9", "Dystonia, unspecified", Department::Neurology},
        {"G25.0", "Essential tremor", Department::Neurology},
        {"G30.9", "Alzheimer disease, unspecified", Department::Neurology},
        {"G31.2", "Degeneration of nervous system due to alcohol", Department::Neurology},
        {"G35", "Multiple sclerosis", Department::Neurology},
        {"G37.9", "Demyelinating disease of central nervous system", Department::Neurology},
        {"G40.3", "Generalized idiopathic epilepsy", Department::Neurology},
        {"G40.9", "Epilepsy, unspecified", Department::Neurology},
        {"G41.9", "Status epilepticus, unspecified", Department::Neurology},
        {"G43.0", "Migraine without aura", Department::Neurology},
        {"G43.9", "Migraine, unspecified", Department::Neurology},
        {"G44.2", "Tension-type headache", Department::Neurology},
        {"G45.9", "Transient cerebral ischemic attack, unspecified", Department::Neurology},
        {"G47.3", "Sleep apnea", Department::Neurology},
        {"G50.0", "Trigeminal neuralgia", Department::Neurology},
        {"G51.0", "Bell palsy", Department::Neurology},
        {"G54.4", "Lumbosacral root disorders", Department::Neurology},
        {"G56.0", "Carpal tunnel syndrome", Department::Neurology},
        {"G57.1", "Meralgia paresthetica", Department::Neurology},
        {"G61.0", "Guillain-Barre syndrome", Department::Neurology},
        {"G62.9", "Polyneuropathy, unspecified", Department::Neurology},
        {"G70.0", "Myasthenia gravis", Department::Neurology},
        {"G71.0", "Muscular dystrophy", Department::Neurology},
        {"G80.9", "Cerebral palsy, unspecified", Department::Neurology},
        {"G93.1", "Anoxic brain damage", Department::Neurology},
        // Endocrinology (E chapter)
        {"E03.9", "Hypothyroidism, unspecified", Department::Endocrinology},
        {"E04.1", "Nontoxic single thyroid nodule", Department::Endocrinology},
        {"E05.0", "Thyrotoxicosis with diffuse goiter", Department::Endocrinology},
        {"E05.9", "Thyrotoxicosis, unspecified", Department::Endocrinology},
        {"E06.3", "Autoimmune thyroiditis", Department::Endocrinology},
        {"E07.9", "Disorder of thyroid, unspecified", Department::Endocrinology},
        {"E10.1", "Type 1 diabetes mellitus with ketoacidosis", Department::Endocrinology},
        {"E10.9", "Type 1 diabetes mellitus without complications", Department::Endocrinology},
        {"E11.2", "Type 2 diabetes mellitus with kidney complications", Department::Endocrinology},
        {"E11.6", "Type 2 diabetes mellitus with other complications", Department::Endocrinology},
        {"E11.9", "Type 2 diabetes mellitus", Department::Endocrinology},
        {"E13.9", "Other specified diabetes mellitus", Department::Endocrinology},
        {"E15", "Nondiabetic hypoglycemic coma", Department::Endocrinology},
        {"E16.2", "Hypoglycemia, unspecified", Department::Endocrinology},
        {"E21.0", "Primary hyperparathyroidism", Department::Endocrinology},
        {"E22.0", "Acromegaly and pituitary gigantism", Department::Endocrinology},
        {"E23.0", "Hypopituitarism", Department::Endocrinology},
        {"E24.9", "Cushing syndrome, unspecified", Department::Endocrinology},
        {"E26.0", "Primary hyperaldosteronism", Department::Endocrinology},
        {"E27.1", "Primary adrenocortical insufficiency", Department::Endocrinology},
        {"E27.4", "Adrenocortical insufficiency, unspecified", Department::Endocrinology},
        {"E28.2", "Polycystic ovarian syndrome", Department::Endocrinology},
        {"E29.1", "Testicular hypofunction", Department::Endocrinology},
        {"E34.9", "Endocrine disorder, unspecified", Department::Endocrinology},
        {"E66.9", "Obesity, unspecified", Department::Endocrinology},
        {"E74.0", "Glycogen storage disease", Department::Endocrinology},
        {"E78.0", "Pure hypercholesterolemia", Department::Endocrinology},
        {"E78.5", "Hyperlipidemia, unspecified", Department::Endocrinology},
        {"E83.5", "Disorders of calcium metabolism", Department::Endocrinology},
        {"E88.9", "Metabolic disorder, unspecified", Department::Endocrinology},
    };
    return table;
}

/// Taxonomy tree built from the embedded subset: one root per 3-character
/// category, leaf children carrying full codes.
inline IcdTaxonomy embedded_taxonomy() {
    std::map<std::string, std::vector<const IcdSubsetEntry*>> by_category;
    for (const auto& e : icd10_subset()) {
        by_category[icd10_category(e.code)].push_back(&e);
    }
    std::vector<TaxonomyNode> roots;
    roots.reserve(by_category.size());
    for (const auto& [category, entries] : by_category) {
        TaxonomyNode cat;
        cat.code = category;
        cat.description = std::string(entries.front()->name) + " and related conditions";
        cat.department = entries.front()->department;
        for (const auto* e : entries) {
            cat.children.push_back(TaxonomyNode{e->code, e->name, e->department, {}});
        }
        roots.push_back(std::move(cat));
    }
    return IcdTaxonomy(std::move(roots));
}

}  // namespace cotforge
