pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
pub const RDF_REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
pub const RDF_NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
pub const RDF_SUBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#subject";
pub const RDF_PREDICATE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#predicate";
pub const RDF_OBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#object";
pub const RDF_STATEMENT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Statement";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const SKOS_PREF_LABEL: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";
pub const SCHEMA_NAME: &str = "http://schema.org/name";
pub const SCHEMA_NAME_HTTPS: &str = "https://schema.org/name";

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
pub const XSD_G_YEAR: &str = "http://www.w3.org/2001/XMLSchema#gYear";
pub const XSD_ANY_URI: &str = "http://www.w3.org/2001/XMLSchema#anyURI";

pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

pub const DCTERMS_LICENSE: &str = "http://purl.org/dc/terms/license";
pub const DCTERMS_SOURCE: &str = "http://purl.org/dc/terms/source";
pub const DCTERMS_PROVENANCE: &str = "http://purl.org/dc/terms/provenance";
pub const DCTERMS_MODIFIED: &str = "http://purl.org/dc/terms/modified";
pub const PROV_WAS_DERIVED_FROM: &str = "http://www.w3.org/ns/prov#wasDerivedFrom";
pub const SCHEMA_LICENSE: &str = "http://schema.org/license";
pub const SCHEMA_LICENSE_HTTPS: &str = "https://schema.org/license";
pub const SCHEMA_DATE_MODIFIED: &str = "http://schema.org/dateModified";
pub const SCHEMA_DATE_MODIFIED_HTTPS: &str = "https://schema.org/dateModified";
pub const CC_LICENSE: &str = "http://creativecommons.org/ns#license";

pub const SEC_PROOF: &str = "https://w3id.org/security#proof";
pub const SEC_SIGNATURE: &str = "https://w3id.org/security#signature";
pub const WOT_ASSURANCE: &str = "http://xmlns.com/wot/0.1/assurance";
