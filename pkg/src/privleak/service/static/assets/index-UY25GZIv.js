(function(){let e=document.createElement(`link`).relList;if(e&&e.supports&&e.supports(`modulepreload`))return;for(let e of document.querySelectorAll(`link[rel="modulepreload"]`))n(e);new MutationObserver(e=>{for(let t of e)if(t.type===`childList`)for(let e of t.addedNodes)e.tagName===`LINK`&&e.rel===`modulepreload`&&n(e)}).observe(document,{childList:!0,subtree:!0});function t(e){let t={};return e.integrity&&(t.integrity=e.integrity),e.referrerPolicy&&(t.referrerPolicy=e.referrerPolicy),t.credentials=e.crossOrigin===`use-credentials`?`include`:e.crossOrigin===`anonymous`?`omit`:`same-origin`,t}function n(e){if(e.ep)return;e.ep=!0;let n=t(e);fetch(e.href,n)}})();var e=class extends Error{status;constructor(e,t){super(t),this.status=e}};async function t(t){if(!t.ok){let n=t.statusText;try{let e=await t.json();e&&typeof e.detail==`string`&&(n=e.detail)}catch{}throw new e(t.status,n)}return t.json()}var n=class{base;fetcher;constructor(e=``,t=fetch.bind(globalThis)){this.base=e,this.fetcher=t}listRules(){return this.fetcher(`${this.base}/rules`).then(e=>t(e))}createSession(e,n,r=0){return this.fetcher(`${this.base}/sessions`,{method:`POST`,headers:{"content-type":`application/json`},body:JSON.stringify({rule_id:e,k_init:n,seed:r})}).then(e=>t(e))}getState(e){return this.fetcher(`${this.base}/sessions/${e}/state`).then(e=>t(e))}sendCommand(e,n){return this.fetcher(`${this.base}/sessions/${e}/command`,{method:`POST`,headers:{"content-type":`application/json`},body:JSON.stringify(n)}).then(e=>t(e))}},r=class{api;events;pollMs;state=null;timer=null;constructor(e,t,n=500){this.api=e,this.events=t,this.pollMs=n}get phase(){return this.state?this.state.state:`none`}get sessionId(){return this.state?this.state.session_id:null}get canEdit(){return this.state!==null&&this.state.state===`awaiting_edits`}async open(e,t,n=0){try{let r=await this.api.createSession(e,t,n);this.accept(r.state)}catch(e){this.events.onError(String(e))}}async send(e){if(this.state){if(!this.canEdit){this.events.onError(`session is not awaiting edits`);return}try{let t=await this.api.sendCommand(this.state.session_id,e);this.accept(t)}catch(e){this.events.onError(String(e)),await this.refresh()}}}async refresh(){if(this.state)try{this.accept(await this.api.getState(this.state.session_id))}catch(e){this.events.onError(String(e))}}stop(){this.timer!==null&&(clearTimeout(this.timer),this.timer=null)}accept(e){this.state=e,this.events.onState(e),this.stop(),e.state===`iterating`&&(this.timer=setTimeout(()=>void this.refresh(),this.pollMs))}};function i(e){let t=[];for(let n=0;n+1<e.length;n++)t.push((e[n]+e[n+1])/2);return t}function a(e,t,n){let r=n.counts.length;if(r===0||t<=0||e<0||e>=t)return null;let a=Math.min(r-1,Math.floor(e/t*r));return i(n.edges)[a]}function o(e,t,n){return Math.exp(-Math.abs(e-t)/n)/(2*n)}function s(e,t,n,r){return t.deleted||t.lambda<=0?0:o(e,t.median,t.lambda)*t.beta*n*r}var c=[`#2563eb`,`#dc2626`,`#059669`,`#d97706`,`#7c3aed`,`#0891b2`],l=class{onPick;root;canvas;ctx;histogram={edges:[],counts:[]};components=[];nSamples=0;enabled=!1;constructor(e,t=720,n=260){this.onPick=e,this.root=document.createElement(`div`),this.root.className=`histogram`,this.canvas=document.createElement(`canvas`),this.canvas.width=t,this.canvas.height=n,this.root.appendChild(this.canvas);let r=this.canvas.getContext(`2d`);if(!r)throw Error(`canvas 2d context unavailable`);this.ctx=r,this.canvas.addEventListener(`click`,e=>{if(!this.enabled)return;let t=this.canvas.getBoundingClientRect(),n=a(e.clientX-t.left,this.canvas.width,this.histogram);n!==null&&this.onPick(n)})}update(e,t,n,r){this.histogram=e,this.components=t,this.nSamples=n,this.enabled=r,this.canvas.style.cursor=r?`crosshair`:`default`,this.draw()}draw(){let{ctx:e,canvas:t}=this,{edges:n,counts:r}=this.histogram;if(e.clearRect(0,0,t.width,t.height),r.length===0){e.fillStyle=`#6b7280`,e.fillText(`no entropy samples`,12,20);return}let i=t.width,a=t.height,o=n[1]-n[0],l=this.components.filter(e=>!e.deleted&&e.lambda>0).map(e=>s(e.median,e,this.nSamples,o)),u=Math.max(...r,...l,1),d=i/r.length;e.fillStyle=`#93c5fd`,r.forEach((t,n)=>{let r=t/u*(a-10);e.fillRect(n*d,a-r,Math.max(d-1,1),r)});let f=n[0],p=n[n.length-1];this.components.forEach((t,n)=>{if(!(t.deleted||t.lambda<=0)){e.strokeStyle=c[n%c.length],e.lineWidth=1.5,e.beginPath();for(let n=0;n<i;n++){let r=s(f+(p-f)*n/(i-1),t,this.nSamples,o),c=a-r/u*(a-10);n===0?e.moveTo(n,c):e.lineTo(n,c)}e.stroke()}})}};function u(e){let t=[`k    beta     median   sigma_mdl  sigma_n    sigma_L`];for(let n of e.components)t.push(`${String(n.index).padEnd(4)} ${n.beta.toFixed(4)}   ${n.median.toFixed(4)}   ${n.sigma_model.toFixed(4)}     ${n.sigma_normal.toFixed(4)}     ${n.sigma_laplace.toFixed(4)}`);return t.push(`rule sigma_model=${e.rule_sigma_model.toFixed(4)} sigma_normal=${e.rule_sigma_normal.toFixed(4)} sigma_laplace=${e.rule_sigma_laplace.toFixed(4)}`),t.join(`
`)}var d=class{onCommand;root;status;modelPre;sigmaPre;buttons=[];kInput;xInput;toast;constructor(e){this.onCommand=e,this.root=document.createElement(`div`),this.root.className=`panel`,this.status=document.createElement(`span`),this.status.className=`badge`,this.root.appendChild(this.status);let t=document.createElement(`div`);t.className=`controls`,this.kInput=this.numberInput(`k`,`1`),this.xInput=this.numberInput(`median`,``),t.append(this.kInput,this.xInput),t.appendChild(this.button(`set median`,()=>{this.onCommand({kind:`set_median`,k:Number(this.kInput.value),x:Number(this.xInput.value)})})),t.appendChild(this.button(`delete k`,()=>{this.onCommand({kind:`delete`,k:Number(this.kInput.value)})})),t.appendChild(this.button(`continue`,()=>this.onCommand({kind:`continue`}))),t.appendChild(this.button(`finalize`,()=>this.onCommand({kind:`finalize`}))),this.root.appendChild(t),this.toast=document.createElement(`div`),this.toast.className=`toast`,this.root.appendChild(this.toast),this.modelPre=document.createElement(`pre`),this.sigmaPre=document.createElement(`pre`),this.root.append(this.modelPre,this.sigmaPre)}numberInput(e,t){let n=document.createElement(`input`);return n.placeholder=e,n.value=t,n.size=8,n}button(e,t){let n=document.createElement(`button`);return n.textContent=e,n.addEventListener(`click`,t),this.buttons.push(n),n}showError(e){this.toast.textContent=e}render(e){this.status.textContent=`${e.rule_id} · ${e.state} · N=${e.n_samples}`;let t=e.state===`awaiting_edits`;this.buttons.forEach(e=>e.disabled=!t),this.toast.textContent=``;let n=e.model.components.map((e,t)=>({...e,k:t+1})).filter(e=>!e.deleted);this.modelPre.textContent=n.map(e=>`k=${e.k} median=${e.median.toFixed(4)} lambda=${e.lambda.toFixed(4)} beta=${e.beta.toFixed(3)}`).join(`
`),this.sigmaPre.textContent=e.sigma_tables?u(e.sigma_tables):``}},f=new n(``);function p(e,t=``){let n=document.createElement(e);return t&&(n.textContent=t),n}function m(e){e.appendChild(p(`h1`,`attack-vector clusters`));let t=p(`div`),n=document.createElement(`select`),i=document.createElement(`input`);i.value=`2`,i.size=4;let a=p(`button`,`open session`);t.append(n,i,a),e.appendChild(t);let o=new d(e=>{e.kind===`delete`?c.send({op:`delcl`,clusters:[e.k]}):e.kind===`set_median`?c.send({op:`setcl`,k:e.k,median:e.x}):c.send({op:`cont`})}),s=new l(e=>void c.send({op:`pickcl`,x:e})),c=new r(f,{onState:e=>{s.update(e.histogram,e.model.components,e.n_samples,e.state===`awaiting_edits`),o.render(e)},onError:e=>o.showError(e)});e.append(s.root,o.root),f.listRules().then(e=>{for(let t of e){let e=document.createElement(`option`);e.value=t.rule_id,e.textContent=`${t.rule_id} (${t.alarms})`,n.appendChild(e)}}).catch(e=>o.showError(String(e))),a.addEventListener(`click`,()=>{c.open(n.value,Number(i.value)||1)})}m(document.getElementById(`app`));